import { mount } from './ui.js'

const root = document.getElementById('app')
if (!root) throw new Error('missing #app container')

const params = new URLSearchParams(window.location.search)
const baseUrl =
  params.get('api') ?? (window as { CADENZA_API?: string }).CADENZA_API ??
  'http://127.0.0.1:8000'

mount(root, baseUrl)
