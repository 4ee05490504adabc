// Typed client for the harmonization service. Every musical change goes
// through these five endpoints; the UI never edits musical data locally.

export type VariantEntry = {
  template_id: string
  style: string | null
}

export type PhraseSummary = {
  index: number
  label: string
  identity: string
  template_id: string
  style: string | null
  losses: { micro: number; meso: number; macro: number }
  variants: VariantEntry[]
  available_styles: string[]
  chords: [number, string][]
}

export type SongSummary = {
  session_id: string
  total_score: number
  alpha: number
  beta: number
  texture_complexity: string
  texture_ids: string[]
  phrases: PhraseSummary[]
}

export type UploadResponse = {
  session_id: string
  phrase_count: number
  phrases: { index: number; label: string; length_bars: number }[]
  key: string
  meter: string
}

export type GenerateOptions = {
  style?: string
  complexity?: string
  alpha?: number
  beta?: number
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`)
  }

  get needsGenerate(): boolean {
    return this.status === 409
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText
  try {
    const body = (await response.json()) as { detail?: unknown }
    if (typeof body.detail === 'string') detail = body.detail
    else if (body.detail !== undefined) detail = JSON.stringify(body.detail)
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail)
}

export class SongApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, '') + path
  }

  async uploadSong(
    file: Blob,
    filename: string,
    phrases: string,
    key: string,
    mode: string,
    meter = '4/4',
  ): Promise<UploadResponse> {
    const form = new FormData()
    form.append('file', file, filename)
    form.append('phrases', phrases)
    form.append('key', key)
    form.append('mode', mode)
    form.append('meter', meter)
    const response = await this.fetchFn(this.url('/songs'), {
      method: 'POST',
      body: form,
    })
    if (!response.ok) await parseError(response)
    return (await response.json()) as UploadResponse
  }

  private async post(path: string, body: unknown): Promise<SongSummary> {
    const response = await this.fetchFn(this.url(path), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    })
    if (!response.ok) await parseError(response)
    return (await response.json()) as SongSummary
  }

  generate(sessionId: string, options: GenerateOptions = {}): Promise<SongSummary> {
    return this.post(`/songs/${sessionId}/generate`, options)
  }

  restylePhrase(sessionId: string, index: number, style: string): Promise<SongSummary> {
    return this.post(`/songs/${sessionId}/phrases/${index}/style`, { style })
  }

  setTexture(sessionId: string, complexity: string): Promise<SongSummary> {
    return this.post(`/songs/${sessionId}/texture`, { complexity })
  }

  async downloadMidi(sessionId: string): Promise<ArrayBuffer> {
    const response = await this.fetchFn(this.url(`/songs/${sessionId}/midi`))
    if (!response.ok) await parseError(response)
    return await response.arrayBuffer()
  }
}

const PHRASE_PATTERN = /^([A-Za-z](?:4|8))+$/

// client-side pre-checks: reject obviously bad input before any request
export function validatePhraseString(phrases: string): string | null {
  if (!phrases.trim()) return 'phrase string is required, e.g. A8A8B8'
  if (!PHRASE_PATTERN.test(phrases.trim()))
    return 'phrases must be letter+length pairs with lengths 4 or 8, e.g. A8A8B8'
  return null
}

export function looksLikeMidi(header: ArrayBuffer): boolean {
  const bytes = new Uint8Array(header.slice(0, 4))
  return (
    bytes.length === 4 &&
    bytes[0] === 0x4d && // M
    bytes[1] === 0x54 && // T
    bytes[2] === 0x68 && // h
    bytes[3] === 0x64 //    d
  )
}
