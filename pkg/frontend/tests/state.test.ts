import { describe, expect, it } from 'vitest'

import type { SongSummary, UploadResponse } from '../src/api.js'
import { looksLikeMidi, validatePhraseString } from '../src/api.js'
import {
  MutationQueue,
  applyError,
  applySummary,
  applyUpload,
  initialState,
  styleMenu,
} from '../src/state.js'

const upload: UploadResponse = {
  session_id: 'abc123',
  phrase_count: 2,
  phrases: [
    { index: 0, label: 'A', length_bars: 8 },
    { index: 1, label: 'B', length_bars: 8 },
  ],
  key: 'C major',
  meter: '4/4',
}

const summary: SongSummary = {
  session_id: 'abc123',
  total_score: 2.5,
  alpha: 0.1,
  beta: 0.5,
  texture_complexity: 'medium',
  texture_ids: ['tex_a', 'tex_a'],
  phrases: [
    {
      index: 0, label: 'A', identity: 'I-V-vi-IV', template_id: 't1',
      style: 'pop_standard',
      losses: { micro: 0.1, meso: 0, macro: 0 },
      variants: [
        { template_id: 't1', style: 'pop_standard' },
        { template_id: 't2', style: 'pop_complex' },
      ],
      available_styles: ['pop_complex', 'pop_standard'],
      chords: [[0, 'maj']],
    },
    {
      index: 1, label: 'B', identity: 'I-IV-V-I', template_id: 't3',
      style: 'pop_complex',
      losses: { micro: 0.2, meso: 0, macro: 0.3 },
      variants: [{ template_id: 't3', style: 'pop_complex' }],
      available_styles: ['pop_complex'],
      chords: [[0, 'maj']],
    },
  ],
}

describe('state mirroring', () => {
  it('upload resets and records phrase shells', () => {
    const state = applyUpload(initialState(), upload)
    expect(state.sessionId).toBe('abc123')
    expect(state.status).toBe('uploaded')
    expect(state.phrases.map((p) => p.label)).toEqual(['A', 'B'])
    expect(state.phrases.every((p) => p.identity === null)).toBe(true)
  })

  it('summary replaces phrase views exactly', () => {
    const state = applySummary(applyUpload(initialState(), upload), summary)
    expect(state.status).toBe('generated')
    expect(state.totalScore).toBe(2.5)
    expect(state.phrases[0]?.identity).toBe('I-V-vi-IV')
    expect(state.phrases[0]?.availableStyles).toEqual(['pop_complex', 'pop_standard'])
    expect(state.phrases[0]?.variants).toEqual([
      { templateId: 't1', style: 'pop_standard' },
      { templateId: 't2', style: 'pop_complex' },
    ])
    expect(state.phrases[1]?.lengthBars).toBe(8)
  })

  it('errors keep the mirrored musical state intact', () => {
    const generated = applySummary(applyUpload(initialState(), upload), summary)
    const failed = applyError({ ...generated, status: 'busy' }, 'boom')
    expect(failed.error).toBe('boom')
    expect(failed.status).toBe('generated')
    expect(failed.phrases).toEqual(generated.phrases)
  })
})

describe('style menus', () => {
  it('enables exactly the styles present in the variant set', () => {
    const state = applySummary(applyUpload(initialState(), upload), summary)
    const menu = styleMenu(state.phrases[1]!)
    const enabled = menu.filter((entry) => entry.enabled).map((entry) => entry.style)
    expect(enabled).toEqual(['pop_complex'])
    const disabled = menu.find((entry) => entry.style === 'dark')
    expect(disabled?.enabled).toBe(false)
    expect(disabled?.tooltip).toContain('available: pop_complex')
  })

  it('marks the active style', () => {
    const state = applySummary(applyUpload(initialState(), upload), summary)
    const menu = styleMenu(state.phrases[0]!)
    expect(menu.find((entry) => entry.active)?.style).toBe('pop_standard')
  })
})

describe('client-side validation', () => {
  it('accepts well-formed phrase strings', () => {
    expect(validatePhraseString('A8A8B8')).toBeNull()
    expect(validatePhraseString('a4b8')).toBeNull()
  })

  it('rejects malformed phrase strings', () => {
    expect(validatePhraseString('')).toMatch(/required/)
    expect(validatePhraseString('A6')).toMatch(/4 or 8/)
    expect(validatePhraseString('8A')).toMatch(/4 or 8/)
  })

  it('detects MIDI headers', () => {
    expect(looksLikeMidi(new TextEncoder().encode('MThd....').buffer)).toBe(true)
    expect(looksLikeMidi(new TextEncoder().encode('RIFF....').buffer)).toBe(false)
    expect(looksLikeMidi(new ArrayBuffer(2))).toBe(false)
  })
})

describe('mutation queue', () => {
  it('runs tasks strictly in order', async () => {
    const queue = new MutationQueue()
    const order: number[] = []
    const slow = queue.enqueue(async () => {
      await new Promise((resolve) => setTimeout(resolve, 30))
      order.push(1)
    })
    const fast = queue.enqueue(async () => {
      order.push(2)
    })
    await Promise.all([slow, fast])
    expect(order).toEqual([1, 2])
  })

  it('keeps going after a failure', async () => {
    const queue = new MutationQueue()
    await expect(
      queue.enqueue(async () => {
        throw new Error('nope')
      }),
    ).rejects.toThrow('nope')
    await expect(queue.enqueue(async () => 'ok')).resolves.toBe('ok')
  })
})
