// UI state: a read-only mirror of the latest server summary plus transient
// upload/playback status. Mutations are queued so at most one request per
// session is in flight.

import type { PhraseSummary, SongSummary, UploadResponse } from './api.js'

export type GenerationStatus =
  | 'idle'
  | 'uploading'
  | 'uploaded'
  | 'generating'
  | 'generated'
  | 'busy'

export type PhraseView = {
  index: number
  label: string
  lengthBars: number
  identity: string | null
  style: string | null
  templateId: string | null
  availableStyles: string[]
  variants: { templateId: string; style: string | null }[]
}

export type UiSongState = {
  sessionId: string | null
  status: GenerationStatus
  error: string | null
  key: string | null
  meter: string | null
  phrases: PhraseView[]
  totalScore: number | null
  textureComplexity: string | null
  textureIds: string[]
  playbackPositionSlots: number
  playing: boolean
}

export function initialState(): UiSongState {
  return {
    sessionId: null,
    status: 'idle',
    error: null,
    key: null,
    meter: null,
    phrases: [],
    totalScore: null,
    textureComplexity: null,
    textureIds: [],
    playbackPositionSlots: 0,
    playing: false,
  }
}

export function applyUpload(state: UiSongState, response: UploadResponse): UiSongState {
  return {
    ...initialState(),
    sessionId: response.session_id,
    status: 'uploaded',
    key: response.key,
    meter: response.meter,
    phrases: response.phrases.map((p) => ({
      index: p.index,
      label: p.label,
      lengthBars: p.length_bars,
      identity: null,
      style: null,
      templateId: null,
      availableStyles: [],
      variants: [],
    })),
  }
}

function phraseView(phrase: PhraseSummary, lengthBars: number): PhraseView {
  return {
    index: phrase.index,
    label: phrase.label,
    lengthBars,
    identity: phrase.identity,
    style: phrase.style,
    templateId: phrase.template_id,
    availableStyles: [...phrase.available_styles],
    variants: phrase.variants.map((v) => ({
      templateId: v.template_id,
      style: v.style,
    })),
  }
}

// The per-phrase view mirrors the summary exactly; nothing is synthesized
// client-side beyond keeping the phrase lengths from the upload response.
export function applySummary(state: UiSongState, summary: SongSummary): UiSongState {
  return {
    ...state,
    sessionId: summary.session_id,
    status: 'generated',
    error: null,
    phrases: summary.phrases.map((phrase, i) =>
      phraseView(phrase, state.phrases[i]?.lengthBars ?? 0),
    ),
    totalScore: summary.total_score,
    textureComplexity: summary.texture_complexity,
    textureIds: [...summary.texture_ids],
  }
}

export function applyError(state: UiSongState, message: string): UiSongState {
  const status = state.status === 'busy' || state.status === 'generating'
    ? state.phrases.some((p) => p.identity !== null) ? 'generated' : 'uploaded'
    : state.status
  return { ...state, status, error: message }
}

export type StyleMenuEntry = {
  style: string
  enabled: boolean
  active: boolean
  tooltip: string | null
}

export const ALL_STYLES = ['pop_standard', 'pop_complex', 'dark', 'rnb', 'unknown']

// Dropdown entries for one phrase: every known style appears, but only the
// styles present in the server's variant set are enabled.
export function styleMenu(phrase: PhraseView): StyleMenuEntry[] {
  return ALL_STYLES.map((style) => {
    const enabled = phrase.availableStyles.includes(style)
    return {
      style,
      enabled,
      active: phrase.style === style,
      tooltip: enabled
        ? null
        : `no ${style} variant of ${phrase.identity ?? 'this phrase'}; ` +
          `available: ${phrase.availableStyles.join(', ') || 'none yet'}`,
    }
  })
}

// Serializes mutations: each enqueued request starts only after the
// previous one settled, so the UI keeps at most one in flight.
export class MutationQueue {
  private tail: Promise<unknown> = Promise.resolve()

  enqueue<T>(task: () => Promise<T>): Promise<T> {
    const run = this.tail.then(task, task)
    this.tail = run.catch(() => undefined)
    return run
  }
}
