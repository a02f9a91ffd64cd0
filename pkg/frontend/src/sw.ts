/// <reference lib="WebWorker" />
/**
 * Service-worker glue around PackageRuntime.
 *
 * The worker checks the manifest once per page load (a navigation request),
 * blocks that navigation until any refresh finished, and serves packaged
 * resources from the app-specific space. Everything else falls through to
 * the network stack.
 *
 * Configuration is injected at build time by replacing the two URL
 * constants below (the harness server does this on the fly).
 */

import { PackageRuntime, PersistedState, StateStore, StoredEntry } from './wrapper.js'

declare const self: ServiceWorkerGlobalScope

const MANIFEST_URL = '/rewap/manifest.appcache'
const MAPPING_URL = '/rewap/mapping_v{version}.txt'

const META_KEY = '/__rewap_state__'
const CACHE_NAME = 'rewap-app-space'

/** App-specific space on the Cache API: bodies as responses, plus one JSON
 * meta entry carrying manifest, mapping, and hashes. */
class CacheStateStore implements StateStore {
  async load(): Promise<PersistedState | null> {
    const cache = await caches.open(CACHE_NAME)
    const meta = await cache.match(META_KEY)
    if (!meta) return null
    const parsed = (await meta.json()) as {
      manifestText: string
      mappingText: string
      entries: { representativeUrl: string; contentHash: string; contentType: string }[]
    }
    const entries: StoredEntry[] = []
    for (const entry of parsed.entries) {
      const response = await cache.match(entry.representativeUrl)
      if (!response) return null // space is inconsistent; start cold
      entries.push({ ...entry, body: new Uint8Array(await response.arrayBuffer()) })
    }
    return { manifestText: parsed.manifestText, mappingText: parsed.mappingText, entries }
  }

  async save(state: PersistedState): Promise<void> {
    const cache = await caches.open(CACHE_NAME)
    for (const key of await cache.keys()) {
      await cache.delete(key)
    }
    for (const entry of state.entries) {
      await cache.put(
        entry.representativeUrl,
        new Response(entry.body.slice().buffer, {
          headers: { 'content-type': entry.contentType },
        }),
      )
    }
    await cache.put(
      META_KEY,
      new Response(
        JSON.stringify({
          manifestText: state.manifestText,
          mappingText: state.mappingText,
          entries: state.entries.map(({ representativeUrl, contentHash, contentType }) => ({
            representativeUrl,
            contentHash,
            contentType,
          })),
        }),
        { headers: { 'content-type': 'application/json' } },
      ),
    )
  }
}

async function fetchResource(url: string) {
  const response = await fetch(url, { cache: 'no-cache' })
  if (!response.ok) {
    throw new Error(`fetch ${url}: ${response.status}`)
  }
  return {
    body: new Uint8Array(await response.arrayBuffer()),
    contentType: response.headers.get('content-type') ?? 'application/octet-stream',
  }
}

const runtime = new PackageRuntime(
  { manifestUrl: MANIFEST_URL, mappingUrl: MAPPING_URL },
  fetchResource,
  new CacheStateStore(),
  (message) => console.warn('[rewap]', message),
)

let startup: Promise<unknown> | null = null

self.addEventListener('install', () => {
  void self.skipWaiting()
})

self.addEventListener('activate', (event) => {
  event.waitUntil(self.clients.claim())
})

self.addEventListener('fetch', (event) => {
  const request = event.request
  if (request.mode === 'navigate') {
    // once per page load: update check (and refresh) before the app loads
    startup = runtime.start()
    event.respondWith(startup.then(() => fetch(request)))
    return
  }
  event.respondWith(
    (startup ?? Promise.resolve()).then(() => {
      const result = runtime.intercept(request.url)
      if (result.kind === 'local') {
        return new Response(result.entry.body.slice().buffer, {
          headers: { 'content-type': result.entry.contentType, 'x-rewap': 'local' },
        })
      }
      return fetch(request)
    }),
  )
})
