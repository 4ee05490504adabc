// Minimal standard-MIDI-file reader for client-side playback: just notes,
// tempo, and time signature from format 0/1 files.

export type ParsedNote = {
  startTicks: number
  durationTicks: number
  pitch: number
  velocity: number
  track: number
}

export type ParsedMidi = {
  division: number
  tempoUsPerQuarter: number
  timeSignature: [number, number]
  notes: ParsedNote[]
  totalTicks: number
}

class Cursor {
  pos = 0
  constructor(private readonly view: DataView) {}

  get remaining(): number {
    return this.view.byteLength - this.pos
  }

  u8(): number {
    if (this.remaining < 1) throw new Error('truncated MIDI data')
    return this.view.getUint8(this.pos++)
  }

  u16(): number {
    const value = this.view.getUint16(this.pos)
    this.pos += 2
    return value
  }

  u32(): number {
    const value = this.view.getUint32(this.pos)
    this.pos += 4
    return value
  }

  skip(n: number): void {
    if (this.remaining < n) throw new Error('truncated MIDI data')
    this.pos += n
  }

  varlen(): number {
    let value = 0
    for (let i = 0; i < 4; i++) {
      const byte = this.u8()
      value = (value << 7) | (byte & 0x7f)
      if ((byte & 0x80) === 0) return value
    }
    throw new Error('bad variable-length quantity')
  }

  ascii(n: number): string {
    let out = ''
    for (let i = 0; i < n; i++) out += String.fromCharCode(this.u8())
    return out
  }
}

export function parseMidi(buffer: ArrayBuffer): ParsedMidi {
  const cursor = new Cursor(new DataView(buffer))
  if (cursor.ascii(4) !== 'MThd') throw new Error('not a MIDI file')
  const headerLength = cursor.u32()
  const format = cursor.u16()
  const trackCount = cursor.u16()
  const division = cursor.u16()
  cursor.skip(headerLength - 6)
  if (format > 1) throw new Error(`unsupported MIDI format ${format}`)
  if (division & 0x8000) throw new Error('SMPTE division not supported')

  const midi: ParsedMidi = {
    division,
    tempoUsPerQuarter: 500_000,
    timeSignature: [4, 4],
    notes: [],
    totalTicks: 0,
  }

  for (let trackIndex = 0; trackIndex < trackCount; trackIndex++) {
    if (cursor.ascii(4) !== 'MTrk') throw new Error('missing MTrk chunk')
    const end = cursor.pos + cursor.u32()
    let tick = 0
    let runningStatus = 0
    const open = new Map<number, { tick: number; velocity: number }[]>()

    const close = (pitch: number, endTick: number) => {
      const stack = open.get(pitch)
      const started = stack?.shift()
      if (started) {
        midi.notes.push({
          startTicks: started.tick,
          durationTicks: Math.max(1, endTick - started.tick),
          pitch,
          velocity: started.velocity,
          track: trackIndex,
        })
      }
    }

    while (cursor.pos < end) {
      tick += cursor.varlen()
      let status = cursor.u8()
      if (status < 0x80) {
        if (runningStatus < 0x80) throw new Error('dangling running status')
        cursor.pos -= 1
        status = runningStatus
      }
      if (status === 0xff) {
        const metaType = cursor.u8()
        const length = cursor.varlen()
        if (metaType === 0x51 && length === 3) {
          midi.tempoUsPerQuarter = (cursor.u8() << 16) | (cursor.u8() << 8) | cursor.u8()
        } else if (metaType === 0x58 && length >= 2) {
          const numerator = cursor.u8()
          const denominatorPower = cursor.u8()
          midi.timeSignature = [numerator, 1 << denominatorPower]
          cursor.skip(length - 2)
        } else {
          cursor.skip(length)
        }
        continue
      }
      if (status === 0xf0 || status === 0xf7) {
        cursor.skip(cursor.varlen())
        continue
      }
      runningStatus = status
      const kind = status & 0xf0
      if (kind === 0x90) {
        const pitch = cursor.u8()
        const velocity = cursor.u8()
        if (velocity > 0) {
          const stack = open.get(pitch) ?? []
          stack.push({ tick, velocity })
          open.set(pitch, stack)
        } else {
          close(pitch, tick)
        }
      } else if (kind === 0x80) {
        const pitch = cursor.u8()
        cursor.u8()
        close(pitch, tick)
      } else if (kind === 0xa0 || kind === 0xb0 || kind === 0xe0) {
        cursor.skip(2)
      } else if (kind === 0xc0 || kind === 0xd0) {
        cursor.skip(1)
      } else {
        throw new Error(`unsupported status byte 0x${status.toString(16)}`)
      }
    }
    cursor.pos = end
    midi.totalTicks = Math.max(
      midi.totalTicks,
      ...midi.notes.filter((n) => n.track === trackIndex)
        .map((n) => n.startTicks + n.durationTicks),
      0,
    )
  }

  midi.notes.sort((a, b) => a.startTicks - b.startTicks || a.pitch - b.pitch)
  return midi
}

export function ticksToSeconds(ticks: number, midi: ParsedMidi): number {
  return (ticks / midi.division) * (midi.tempoUsPerQuarter / 1_000_000)
}

export function ticksToSlots(ticks: number, midi: ParsedMidi): number {
  return ticks / (midi.division / 2)
}
