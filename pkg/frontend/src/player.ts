// Client-side playback: a small WebAudio piano (layered oscillators with a
// percussive envelope) plus a position callback for the piano-roll cursor.
// Scheduling math is kept pure so it can be tested without an AudioContext.

import { ParsedMidi, ticksToSeconds, ticksToSlots } from './midi.js'

export type ScheduledNote = {
  startSeconds: number
  durationSeconds: number
  pitch: number
  gain: number
  track: number
}

export function schedule(midi: ParsedMidi): ScheduledNote[] {
  return midi.notes.map((note) => ({
    startSeconds: ticksToSeconds(note.startTicks, midi),
    durationSeconds: ticksToSeconds(note.durationTicks, midi),
    pitch: note.pitch,
    gain: (note.velocity / 127) * 0.35,
    track: note.track,
  }))
}

export function totalSeconds(midi: ParsedMidi): number {
  return ticksToSeconds(midi.totalTicks, midi)
}

export function positionSlots(midi: ParsedMidi, elapsedSeconds: number): number {
  const ticksPerSecond = midi.division * (1_000_000 / midi.tempoUsPerQuarter)
  return ticksToSlots(elapsedSeconds * ticksPerSecond, midi)
}

export function pitchToHz(pitch: number): number {
  return 440 * Math.pow(2, (pitch - 69) / 12)
}

type PositionListener = (slots: number, done: boolean) => void

export class Player {
  private context: AudioContext | null = null
  private midi: ParsedMidi | null = null
  private startedAt = 0
  private frame = 0
  private stopFns: (() => void)[] = []
  playing = false

  constructor(private readonly onPosition: PositionListener) {}

  load(buffer: ArrayBuffer, parse: (b: ArrayBuffer) => ParsedMidi): void {
    this.stop()
    this.midi = parse(buffer)
  }

  get loaded(): boolean {
    return this.midi !== null
  }

  toggle(): void {
    if (this.playing) this.stop()
    else void this.play()
  }

  private voice(context: AudioContext, note: ScheduledNote, destination: AudioNode): () => void {
    const start = this.startedAt + note.startSeconds
    const stop = start + Math.max(0.08, note.durationSeconds)
    const envelope = context.createGain()
    envelope.gain.setValueAtTime(0, start)
    envelope.gain.linearRampToValueAtTime(note.gain, start + 0.01)
    envelope.gain.exponentialRampToValueAtTime(0.001, stop + 0.25)
    envelope.connect(destination)
    const oscillators = [
      { type: 'triangle' as OscillatorType, detune: 0, level: 1.0 },
      { type: 'sine' as OscillatorType, detune: 1200, level: 0.25 },
    ].map(({ type, detune, level }) => {
      const oscillator = context.createOscillator()
      oscillator.type = type
      oscillator.frequency.value = pitchToHz(note.pitch)
      oscillator.detune.value = detune
      const tap = context.createGain()
      tap.gain.value = level
      oscillator.connect(tap)
      tap.connect(envelope)
      oscillator.start(start)
      oscillator.stop(stop + 0.3)
      return oscillator
    })
    return () => oscillators.forEach((o) => {
      try {
        o.stop()
      } catch {
        // already stopped
      }
    })
  }

  async play(): Promise<void> {
    if (!this.midi || this.playing) return
    this.context = this.context ?? new AudioContext()
    await this.context.resume()
    const master = this.context.createGain()
    master.gain.value = 0.9
    master.connect(this.context.destination)
    this.startedAt = this.context.currentTime + 0.05
    this.stopFns = schedule(this.midi).map((note) =>
      this.voice(this.context as AudioContext, note, master),
    )
    this.playing = true
    const duration = totalSeconds(this.midi)
    const tick = () => {
      if (!this.playing || !this.context || !this.midi) return
      const elapsed = this.context.currentTime - this.startedAt
      const done = elapsed >= duration
      this.onPosition(positionSlots(this.midi, Math.max(0, elapsed)), done)
      if (done) this.stop()
      else this.frame = requestAnimationFrame(tick)
    }
    this.frame = requestAnimationFrame(tick)
  }

  stop(): void {
    if (this.frame) cancelAnimationFrame(this.frame)
    this.stopFns.forEach((stop) => stop())
    this.stopFns = []
    if (this.playing) this.onPosition(0, true)
    this.playing = false
  }
}
