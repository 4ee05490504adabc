// DOM layer: renders the mirrored server state and wires controls to the
// controller. No musical data is computed here.

import { SongApi } from './api.js'
import { SongController } from './controller.js'
import { parseMidi, ticksToSlots, type ParsedMidi } from './midi.js'
import { Player } from './player.js'
import { ALL_STYLES, styleMenu, type UiSongState } from './state.js'

const COMPLEXITIES = ['sparse', 'medium', 'dense']
const KEYS = ['C', 'C#', 'D', 'Eb', 'E', 'F', 'F#', 'G', 'Ab', 'A', 'Bb', 'B']

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  for (const [name, value] of Object.entries(attrs)) {
    if (name === 'class') node.className = value
    else node.setAttribute(name, value)
  }
  node.append(...children)
  return node
}

function option(value: string, label = value): HTMLOptionElement {
  return el('option', { value }, label)
}

export class App {
  private controller: SongController
  private player: Player
  private parsed: ParsedMidi | null = null
  private root: HTMLElement
  private phraseList!: HTMLElement
  private statusLine!: HTMLElement
  private errorLine!: HTMLElement
  private transport!: HTMLElement
  private cursor!: HTMLElement
  private roll!: HTMLCanvasElement

  constructor(root: HTMLElement, baseUrl: string) {
    this.root = root
    this.controller = new SongController(new SongApi(baseUrl))
    this.player = new Player((slots, done) => {
      this.controller.setPlayback(done ? 0 : slots, !done)
    })
    this.build()
    this.controller.subscribe((state) => this.render(state))
  }

  private build(): void {
    const uploadForm = el('form', { class: 'card', id: 'upload-form' })
    const fileInput = el('input', { type: 'file', accept: '.mid,.midi', id: 'file' })
    const phraseInput = el('input', {
      type: 'text', id: 'phrases', placeholder: 'A8A8B8', value: 'A8A8B8',
    })
    const keySelect = el('select', { id: 'key' }, ...KEYS.map((k) => option(k)))
    const modeSelect = el('select', { id: 'mode' }, option('major'), option('minor'))
    const meterSelect = el('select', { id: 'meter' }, option('4/4'), option('2/4'))
    uploadForm.append(
      el('h2', {}, 'melody'),
      el('label', {}, 'MIDI file ', fileInput),
      el('label', {}, 'phrases ', phraseInput),
      el('label', {}, 'key ', keySelect),
      el('label', {}, 'mode ', modeSelect),
      el('label', {}, 'meter ', meterSelect),
      el('button', { type: 'submit' }, 'upload'),
    )
    uploadForm.addEventListener('submit', (event) => {
      event.preventDefault()
      const file = fileInput.files?.[0]
      if (!file) {
        this.errorLine.textContent = 'choose a MIDI file first'
        return
      }
      void this.controller
        .upload(file, file.name, phraseInput.value, keySelect.value,
                modeSelect.value, meterSelect.value)
        .catch(() => undefined)
    })

    const generateForm = el('form', { class: 'card', id: 'generate-form' })
    const styleSelect = el(
      'select', { id: 'gen-style' },
      option('', 'any style'), ...ALL_STYLES.map((s) => option(s)),
    )
    const complexitySelect = el(
      'select', { id: 'gen-complexity' }, ...COMPLEXITIES.map((c) => option(c)),
    )
    complexitySelect.value = 'medium'
    const alphaInput = el('input', {
      type: 'number', id: 'alpha', min: '0', max: '1', step: '0.05', value: '0.1',
    })
    const betaInput = el('input', {
      type: 'number', id: 'beta', min: '0', max: '1', step: '0.05', value: '0.5',
    })
    generateForm.append(
      el('h2', {}, 'generation'),
      el('label', {}, 'chord style ', styleSelect),
      el('label', {}, 'texture ', complexitySelect),
      el('label', {}, 'alpha ', alphaInput),
      el('label', {}, 'beta ', betaInput),
      el('button', { type: 'submit', id: 'generate' }, 'generate'),
    )
    generateForm.addEventListener('submit', (event) => {
      event.preventDefault()
      void this.controller
        .generate({
          style: styleSelect.value || undefined,
          complexity: complexitySelect.value,
          alpha: Number(alphaInput.value),
          beta: Number(betaInput.value),
        })
        .then(() => this.refreshAudio())
        .catch(() => undefined)
    })

    this.phraseList = el('div', { class: 'card', id: 'phrases-card' })

    const textureRow = el('div', { class: 'row', id: 'texture-row' })
    for (const complexity of COMPLEXITIES) {
      const button = el('button', { 'data-complexity': complexity }, complexity)
      button.addEventListener('click', () => {
        void this.controller
          .setTexture(complexity)
          .then(() => this.refreshAudio())
          .catch(() => undefined)
      })
      textureRow.append(button)
    }

    const applyAllSelect = el(
      'select', { id: 'apply-all-style' }, ...ALL_STYLES.map((s) => option(s)),
    )
    const applyAllButton = el('button', { id: 'apply-all' }, 'apply style to all phrases')
    applyAllButton.addEventListener('click', () => {
      void this.controller
        .applyStyleToAll(applyAllSelect.value)
        .then(() => this.refreshAudio())
        .catch(() => undefined)
    })

    const playButton = el('button', { id: 'play' }, 'play')
    playButton.addEventListener('click', () => {
      if (!this.player.loaded) {
        void this.refreshAudio().then(() => this.player.toggle())
      } else {
        this.player.toggle()
      }
    })
    const downloadButton = el('button', { id: 'download' }, 'download MIDI')
    downloadButton.addEventListener('click', () => {
      void this.controller.download().then((payload) => {
        // save the exact bytes the server returned
        const blob = new Blob([payload], { type: 'audio/midi' })
        const url = URL.createObjectURL(blob)
        const link = el('a', { href: url, download: 'arrangement.mid' })
        link.click()
        URL.revokeObjectURL(url)
      }).catch(() => undefined)
    })
    this.roll = el('canvas', { id: 'roll', width: '960', height: '200' })
    this.cursor = el('div', { id: 'cursor' })
    const rollBox = el('div', { id: 'roll-box' }, this.roll, this.cursor)
    this.transport = el(
      'div', { class: 'card', id: 'transport' },
      el('h2', {}, 'playback'),
      el('div', { class: 'row' },
        playButton, downloadButton, applyAllSelect, applyAllButton, textureRow),
      rollBox,
    )

    this.statusLine = el('div', { id: 'status' })
    this.errorLine = el('div', { id: 'error' })
    this.root.append(
      this.statusLine, this.errorLine, uploadForm, generateForm,
      this.phraseList, this.transport,
    )
  }

  private async refreshAudio(): Promise<void> {
    const payload = await this.controller.download()
    this.parsed = parseMidi(payload)
    this.player.load(payload, parseMidi)
    this.drawRoll()
  }

  private drawRoll(): void {
    const context = this.roll.getContext('2d')
    if (!context || !this.parsed) return
    const { width, height } = this.roll
    context.clearRect(0, 0, width, height)
    context.fillStyle = '#11131a'
    context.fillRect(0, 0, width, height)
    const total = Math.max(1, this.parsed.totalTicks)
    const pitches = this.parsed.notes.map((n) => n.pitch)
    const low = Math.min(...pitches, 36) - 2
    const high = Math.max(...pitches, 84) + 2
    for (const note of this.parsed.notes) {
      const x = (note.startTicks / total) * width
      const w = Math.max(2, (note.durationTicks / total) * width - 1)
      const y = height - ((note.pitch - low) / (high - low)) * height
      context.fillStyle = note.track === 0 ? '#7ec8ff' : '#ffb86b'
      context.fillRect(x, y - 3, w, 5)
    }
  }

  private render(state: UiSongState): void {
    this.statusLine.textContent =
      state.sessionId === null
        ? 'upload a melody to begin'
        : `session ${state.sessionId.slice(0, 8)} | ${state.status}` +
          (state.totalScore !== null ? ` | score ${state.totalScore.toFixed(3)}` : '') +
          (state.textureComplexity ? ` | texture ${state.textureComplexity}` : '')
    this.errorLine.textContent = state.error ?? ''

    this.phraseList.replaceChildren(el('h2', {}, 'phrases'))
    if (!state.phrases.length) {
      this.phraseList.append(el('p', { class: 'hint' }, 'phrases appear after upload'))
    }
    for (const phrase of state.phrases) {
      const chip = el('div', { class: 'chip', 'data-phrase': String(phrase.index) })
      chip.append(
        el('span', { class: 'label' }, `${phrase.label}${phrase.lengthBars}`),
        el('span', { class: 'identity' }, phrase.identity ?? 'not generated'),
        el('span', { class: 'style' }, phrase.style ?? ''),
      )
      if (phrase.identity !== null) {
        const menu = el('select', { class: 'style-menu' })
        for (const entry of styleMenu(phrase)) {
          const item = option(entry.style)
          item.disabled = !entry.enabled
          item.selected = entry.active
          if (entry.tooltip) item.title = entry.tooltip
          menu.append(item)
        }
        menu.addEventListener('change', () => {
          void this.controller
            .restylePhrase(phrase.index, menu.value)
            .then(() => this.refreshAudio())
            .catch(() => undefined)
        })
        chip.append(menu)
        chip.append(
          el('span', { class: 'variants', title: phrase.variants
            .map((v) => `${v.templateId} (${v.style ?? 'mixed'})`).join('\n') },
            `${phrase.variants.length} variant(s)`),
        )
      }
      this.phraseList.append(chip)
    }

    const playButton = this.transport.querySelector('#play') as HTMLButtonElement
    playButton.textContent = state.playing ? 'pause' : 'play'
    if (this.parsed) {
      const totalSlots = Math.max(1, ticksToSlots(this.parsed.totalTicks, this.parsed))
      const fraction = Math.min(1, state.playbackPositionSlots / totalSlots)
      this.cursor.style.left = `${(fraction * 100).toFixed(2)}%`
    }
  }
}

export function mount(root: HTMLElement, baseUrl: string): App {
  return new App(root, baseUrl)
}
