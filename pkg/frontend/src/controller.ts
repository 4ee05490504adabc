// Glue between the API client and the UI state. All mutations round-trip
// through the server and the resulting summary replaces the mirrored state;
// a queue keeps at most one mutation in flight per session.

import {
  ApiError,
  SongApi,
  looksLikeMidi,
  validatePhraseString,
  type GenerateOptions,
} from './api.js'
import {
  MutationQueue,
  UiSongState,
  applyError,
  applySummary,
  applyUpload,
  initialState,
} from './state.js'

export type StateListener = (state: UiSongState) => void

export class SongController {
  private state: UiSongState = initialState()
  private readonly queue = new MutationQueue()
  private readonly listeners: StateListener[] = []
  lastDownload: ArrayBuffer | null = null

  constructor(private readonly api: SongApi) {}

  get current(): UiSongState {
    return this.state
  }

  subscribe(listener: StateListener): void {
    this.listeners.push(listener)
    listener(this.state)
  }

  private setState(state: UiSongState): void {
    this.state = state
    this.listeners.forEach((listener) => listener(state))
  }

  private fail(error: unknown): never {
    const message =
      error instanceof ApiError && error.needsGenerate
        ? 'generate the song first, then adjust styles and textures'
        : error instanceof Error
          ? error.message
          : String(error)
    this.setState(applyError(this.state, message))
    throw error
  }

  async upload(
    file: Blob,
    filename: string,
    phrases: string,
    key: string,
    mode: string,
    meter = '4/4',
  ): Promise<UiSongState> {
    const phraseProblem = validatePhraseString(phrases)
    if (phraseProblem) {
      this.setState(applyError(this.state, phraseProblem))
      throw new Error(phraseProblem)
    }
    const head = await file.slice(0, 4).arrayBuffer()
    if (!looksLikeMidi(head)) {
      const message = `${filename} is not a MIDI file (missing MThd header)`
      this.setState(applyError(this.state, message))
      throw new Error(message)
    }
    this.setState({ ...initialState(), status: 'uploading' })
    try {
      const response = await this.api.uploadSong(
        file, filename, phrases.trim(), key, mode, meter,
      )
      this.lastDownload = null
      this.setState(applyUpload(this.state, response))
      return this.state
    } catch (error) {
      this.fail(error)
    }
  }

  private mutate(
    task: () => Promise<import('./api.js').SongSummary>,
    busyStatus: 'generating' | 'busy',
  ): Promise<UiSongState> {
    return this.queue.enqueue(async () => {
      this.setState({ ...this.state, status: busyStatus, error: null })
      try {
        const summary = await task()
        this.setState(applySummary(this.state, summary))
        return this.state
      } catch (error) {
        this.fail(error)
      }
    })
  }

  generate(options: GenerateOptions = {}): Promise<UiSongState> {
    const sessionId = this.requireSession()
    return this.mutate(() => this.api.generate(sessionId, options), 'generating')
  }

  restylePhrase(index: number, style: string): Promise<UiSongState> {
    const sessionId = this.requireSession()
    return this.mutate(
      () => this.api.restylePhrase(sessionId, index, style), 'busy',
    )
  }

  // "apply to all": one call per phrase, queued in order; phrases whose
  // identity lacks the style are skipped rather than erroring mid-run
  async applyStyleToAll(style: string): Promise<UiSongState> {
    const indices = this.state.phrases
      .filter((p) => p.availableStyles.includes(style))
      .map((p) => p.index)
    let latest = this.state
    for (const index of indices) {
      latest = await this.restylePhrase(index, style)
    }
    return latest
  }

  setTexture(complexity: string): Promise<UiSongState> {
    const sessionId = this.requireSession()
    return this.mutate(() => this.api.setTexture(sessionId, complexity), 'busy')
  }

  async download(): Promise<ArrayBuffer> {
    const sessionId = this.requireSession()
    try {
      const payload = await this.api.downloadMidi(sessionId)
      this.lastDownload = payload
      return payload
    } catch (error) {
      this.fail(error)
    }
  }

  setPlayback(positionSlots: number, playing: boolean): void {
    this.setState({ ...this.state, playbackPositionSlots: positionSlots, playing })
  }

  private requireSession(): string {
    if (!this.state.sessionId) {
      const message = 'upload a melody first'
      this.setState(applyError(this.state, message))
      throw new Error(message)
    }
    return this.state.sessionId
  }
}
