/**
 * The wrapper runtime: check for package updates at startup, refresh the
 * app-specific space when the manifest changed, and answer interception
 * queries from local storage.
 *
 * The runtime is environment-agnostic: fetching, persistence, and logging
 * are injected, so the same code drives the service-worker glue in a
 * browser and the mock-server conformance tests in node.
 */

import {
  assertConsistentBundle,
  parseManifest,
  parseMapping,
} from './formats.js'
import {
  ClientPackageState,
  StoredEntry,
  buildState,
  findRepresentative,
} from './state.js'

export type { StoredEntry } from './state.js'

export interface WrapperConfig {
  /** URL of the Package Manifest. */
  manifestUrl: string
  /** URL of the Resource Mapping; `{version}` expands to the manifest's
   * version so both files always belong to the same package. */
  mappingUrl: string
}

export interface FetchedResource {
  body: Uint8Array
  contentType: string
}

export type ResourceFetcher = (url: string) => Promise<FetchedResource>

export interface PersistedState {
  manifestText: string
  mappingText: string
  entries: StoredEntry[]
}

export interface StateStore {
  load(): Promise<PersistedState | null>
  save(state: PersistedState): Promise<void>
}

export type UpdateCheck = { kind: 'unchanged' } | { kind: 'updated'; manifestText: string }

export type InterceptResult =
  | { kind: 'local'; entry: StoredEntry }
  | { kind: 'passthrough'; reason: 'no-state' | 'no-match' | 'missing-entry' | 'refreshing' | 'degraded' }

export type StartResult =
  | { phase: 'ready'; refreshed: boolean; version: number }
  | { phase: 'offline-warm'; version: number }
  | { phase: 'passthrough' }

/** Dependency-free content digest (FNV-1a, 64-bit, hex). */
export function contentHash(body: Uint8Array): string {
  const prime = 0x100000001b3n
  const mask = 0xffffffffffffffffn
  let hash = 0xcbf29ce484222325n
  for (const byte of body) {
    hash ^= BigInt(byte)
    hash = (hash * prime) & mask
  }
  return hash.toString(16).padStart(16, '0')
}

export class InMemoryStateStore implements StateStore {
  private stored: PersistedState | null = null

  async load(): Promise<PersistedState | null> {
    return this.stored
  }

  async save(state: PersistedState): Promise<void> {
    this.stored = state
  }
}

const decoder = new TextDecoder()

export class PackageRuntime {
  private state: ClientPackageState | null = null
  private refreshing = false
  private degraded = false

  constructor(
    private readonly config: WrapperConfig,
    private readonly fetcher: ResourceFetcher,
    private readonly store: StateStore = new InMemoryStateStore(),
    private readonly log: (message: string) => void = () => {},
  ) {}

  get version(): number | null {
    return this.state?.manifest.version ?? null
  }

  /** Byte comparison against the stored manifest; any difference counts. */
  checkUpdate(serverManifestText: string): UpdateCheck {
    parseManifest(serverManifestText) // malformed manifests are an error, not an update
    if (this.state !== null && this.state.manifestText === serverManifestText) {
      return { kind: 'unchanged' }
    }
    return { kind: 'updated', manifestText: serverManifestText }
  }

  /**
   * Load-time sequence: restore persisted state, check the server manifest,
   * refresh if it moved. Resolves only once the space is consistent, so the
   * app's own loading can safely start afterwards.
   */
  async start(): Promise<StartResult> {
    const persisted = await this.store.load()
    if (persisted !== null) {
      this.state = buildState(
        persisted.manifestText,
        parseMapping(persisted.mappingText),
        new Map(persisted.entries.map((e) => [e.representativeUrl, e])),
      )
    }

    let manifestText: string
    try {
      manifestText = decoder.decode((await this.fetcher(this.config.manifestUrl)).body)
    } catch (error) {
      if (this.state !== null) {
        this.log(`manifest check failed, serving warm state: ${String(error)}`)
        return { phase: 'offline-warm', version: this.state.manifest.version }
      }
      this.log(`manifest check failed with no local state: ${String(error)}`)
      this.degraded = true
      return { phase: 'passthrough' }
    }

    const check = this.checkUpdate(manifestText)
    if (check.kind === 'unchanged') {
      return { phase: 'ready', refreshed: false, version: this.state!.manifest.version }
    }
    try {
      await this.refresh(check.manifestText)
    } catch (error) {
      this.log(`refresh aborted, prior state retained: ${String(error)}`)
      this.degraded = true
      return { phase: 'passthrough' }
    }
    return { phase: 'ready', refreshed: true, version: this.state!.manifest.version }
  }

  /**
   * Full refresh: fetch the mapping of the new manifest's version, then every
   * CACHE-section URL, and swap the space atomically. Any failure leaves the
   * previous state in place.
   */
  async refresh(manifestText: string): Promise<void> {
    this.refreshing = true
    try {
      const manifest = parseManifest(manifestText)
      const mappingUrl = this.config.mappingUrl.replace('{version}', String(manifest.version))
      const mappingText = decoder.decode((await this.fetcher(mappingUrl)).body)
      const records = parseMapping(mappingText)
      assertConsistentBundle(manifest, records)

      const entries = new Map<string, StoredEntry>()
      for (const url of manifest.cacheUrls) {
        const fetched = await this.fetcher(url)
        entries.set(url, {
          representativeUrl: url,
          body: fetched.body,
          contentHash: contentHash(fetched.body),
          contentType: fetched.contentType,
        })
      }
      this.state = buildState(manifestText, records, entries)
      this.degraded = false
      await this.store.save({ manifestText, mappingText, entries: [...entries.values()] })
    } finally {
      this.refreshing = false
    }
  }

  /** Route one resource request: local when a mapping pattern matches and
   * the entry exists, passthrough otherwise. */
  intercept(url: string): InterceptResult {
    if (this.refreshing) {
      return { kind: 'passthrough', reason: 'refreshing' }
    }
    if (this.degraded) {
      return { kind: 'passthrough', reason: 'degraded' }
    }
    if (this.state === null) {
      return { kind: 'passthrough', reason: 'no-state' }
    }
    const representative = findRepresentative(this.state, url)
    if (representative === null) {
      return { kind: 'passthrough', reason: 'no-match' }
    }
    const entry = this.state.entries.get(representative)
    if (entry === undefined) {
      this.log(`pattern matched but entry missing, passing through: ${url}`)
      return { kind: 'passthrough', reason: 'missing-entry' }
    }
    return { kind: 'local', entry }
  }
}
