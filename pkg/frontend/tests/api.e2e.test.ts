// End-to-end tests against a live service instance (see globalSetup).

import { describe, expect, it } from 'vitest'

import { ApiError } from '../src/api.js'
import { SongController } from '../src/controller.js'
import {
  demoMelodyBlob,
  generatedController,
  liveApi,
  uploadedController,
} from './helpers.js'

describe('upload', () => {
  it('creates a session and mirrors the phrase shells', async () => {
    const controller = await uploadedController()
    const state = controller.current
    expect(state.sessionId).toBeTruthy()
    expect(state.status).toBe('uploaded')
    expect(state.phrases.map((p) => `${p.label}${p.lengthBars}`))
      .toEqual(['A8', 'A8', 'B8'])
  })

  it('rejects a malformed phrase string before any request', async () => {
    const controller = new SongController(liveApi())
    await expect(
      controller.upload(demoMelodyBlob(), 'demo.mid', 'A6', 'C', 'major'),
    ).rejects.toThrow(/4 or 8/)
    expect(controller.current.error).toMatch(/4 or 8/)
    expect(controller.current.sessionId).toBeNull()
  })

  it('rejects a non-MIDI file before any request', async () => {
    const controller = new SongController(liveApi())
    const bogus = new Blob([new TextEncoder().encode('not a midi file')])
    await expect(
      controller.upload(bogus, 'song.txt', 'A8', 'C', 'major'),
    ).rejects.toThrow(/not a MIDI file/)
    expect(controller.current.sessionId).toBeNull()
  })

  it('surfaces server-side annotation errors', async () => {
    const controller = new SongController(liveApi())
    // grammar-valid phrase string, but twice the melody's length
    await expect(
      controller.upload(demoMelodyBlob(), 'demo.mid', 'A8A8B8A8A8B8', 'C', 'major'),
    ).rejects.toThrow(ApiError)
    expect(controller.current.error).toMatch(/short|covers/)
  })
})

describe('generate', () => {
  it('fills every phrase with identity, style, and variants', async () => {
    const controller = await generatedController()
    const state = controller.current
    expect(state.status).toBe('generated')
    expect(state.totalScore).not.toBeNull()
    expect(state.textureComplexity).toBe('sparse')
    expect(state.textureIds.length).toBe(3)
    for (const phrase of state.phrases) {
      expect(phrase.identity).toBeTruthy()
      expect(phrase.availableStyles.length).toBeGreaterThan(0)
      expect(phrase.variants.length).toBeGreaterThan(0)
    }
  })

  it('maps an impossible style filter to a visible engine error', async () => {
    const controller = await uploadedController()
    await expect(controller.generate({ style: 'dark' })).rejects.toThrow(ApiError)
    expect(controller.current.error).toMatch(/dark|no .*templates/i)
  })
})

describe('ordering violations', () => {
  it('explains that generation must happen first', async () => {
    const controller = await uploadedController()
    await expect(controller.restylePhrase(0, 'pop_standard')).rejects.toThrow(ApiError)
    expect(controller.current.error).toMatch(/generate the song first/)
  })

  it('texture change before generate is a 409 too', async () => {
    const controller = await uploadedController()
    try {
      await controller.setTexture('dense')
      expect.fail('expected an ApiError')
    } catch (error) {
      expect((error as ApiError).status).toBe(409)
    }
  })
})

describe('texture switching', () => {
  it('keeps harmonization untouched while textures move', async () => {
    const controller = await generatedController()
    const before = controller.current.phrases.map((p) => p.templateId)
    const state = await controller.setTexture('dense')
    expect(state.textureComplexity).toBe('dense')
    expect(state.phrases.map((p) => p.templateId)).toEqual(before)
  })
})

describe('apply to all', () => {
  it('issues one call per eligible phrase', async () => {
    const controller = await generatedController()
    const style = 'pop_standard'
    const state = await controller.applyStyleToAll(style)
    for (const phrase of state.phrases) {
      if (phrase.availableStyles.includes(style)) {
        expect(phrase.style).toBe(style)
      }
    }
  })
})
