/**
 * Client-side package state: the app-specific space.
 *
 * Holds the manifest bytes last accepted (update checks are byte
 * comparisons), one stored response per representative URL, and the compiled
 * mapping patterns used to route intercepted requests.
 */

import { MappingRecord, ParsedManifest, parseManifest } from './formats.js'

export interface StoredEntry {
  representativeUrl: string
  body: Uint8Array
  contentHash: string
  contentType: string
}

export interface CompiledMapping {
  pattern: RegExp
  source: string
  representativeUrl: string
}

export interface ClientPackageState {
  manifestText: string
  manifest: ParsedManifest
  entries: Map<string, StoredEntry>
  mapping: CompiledMapping[]
}

/** Patterns arrive anchored (^...$); compile without flags so escape
 * sequences produced by the engine's escaping stay valid. */
export function compileMapping(records: MappingRecord[]): CompiledMapping[] {
  return records.map((record) => ({
    pattern: new RegExp(record.pattern),
    source: record.pattern,
    representativeUrl: record.representativeUrl,
  }))
}

export function buildState(
  manifestText: string,
  records: MappingRecord[],
  entries: Map<string, StoredEntry>,
): ClientPackageState {
  const manifest = parseManifest(manifestText)
  for (const url of manifest.cacheUrls) {
    if (!entries.has(url)) {
      throw new Error(`stored entries missing manifest URL: ${url}`)
    }
  }
  return { manifestText, manifest, entries, mapping: compileMapping(records) }
}

export function findRepresentative(state: ClientPackageState, url: string): string | null {
  for (const record of state.mapping) {
    if (record.pattern.test(url)) {
      return record.representativeUrl
    }
  }
  return null
}
