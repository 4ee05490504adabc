import { readFileSync } from 'node:fs'
import { dirname, join } from 'node:path'
import { fileURLToPath } from 'node:url'

import { SongApi } from '../src/api.js'
import { SongController } from '../src/controller.js'
import { API_BASE } from './serverUrl.js'

const here = dirname(fileURLToPath(import.meta.url))
export const DEMO_MIDI_PATH = join(
  here, '..', '..', 'src', 'cadenza', 'data', 'demo_melody.mid',
)

export function demoMelodyBlob(): Blob {
  const payload = readFileSync(DEMO_MIDI_PATH)
  return new Blob([new Uint8Array(payload)], { type: 'audio/midi' })
}

export function liveApi(): SongApi {
  return new SongApi(API_BASE)
}

export async function uploadedController(): Promise<SongController> {
  const controller = new SongController(liveApi())
  await controller.upload(demoMelodyBlob(), 'demo.mid', 'A8A8B8', 'C', 'major')
  return controller
}

export async function generatedController(): Promise<SongController> {
  const controller = await uploadedController()
  await controller.generate({ complexity: 'sparse' })
  return controller
}
