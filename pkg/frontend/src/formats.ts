/**
 * Parsers for the package engine's two artifact files.
 *
 * Both formats are line-oriented UTF-8 with LF endings. Update detection is
 * plain byte comparison of manifests, so parsing never normalizes anything.
 */

export class FormatError extends Error {}

export interface ParsedManifest {
  version: number
  createdAtS: number
  cacheUrls: string[]
  networkWildcard: boolean
}

export interface MappingRecord {
  pattern: string
  representativeUrl: string
}

const VERSION_COMMENT = /^# v(\d+) (\d+)$/
const MAPPING_HEADER = '#rewap-mapping v1'

export function parseManifest(text: string): ParsedManifest {
  const lines = text.split('\n')
  if (lines[0] !== 'CACHE MANIFEST') {
    throw new FormatError("first line must be 'CACHE MANIFEST'")
  }
  const versionMatch = lines.length > 1 ? VERSION_COMMENT.exec(lines[1] ?? '') : null
  if (!versionMatch) {
    throw new FormatError("missing '# v<version> <created_at>' comment")
  }
  const cacheUrls: string[] = []
  let networkWildcard = false
  let section: 'cache' | 'network' | null = null
  for (const line of lines.slice(2)) {
    if (!line.trim() || line.startsWith('#')) continue
    if (line === 'CACHE:') {
      section = 'cache'
    } else if (line === 'NETWORK:') {
      section = 'network'
    } else if (section === 'cache') {
      cacheUrls.push(line)
    } else if (section === 'network') {
      networkWildcard = networkWildcard || line === '*'
    } else {
      throw new FormatError(`entry outside any section: ${line}`)
    }
  }
  return {
    version: parseInt(versionMatch[1]!, 10),
    createdAtS: parseInt(versionMatch[2]!, 10),
    cacheUrls,
    networkWildcard,
  }
}

export function parseMapping(text: string): MappingRecord[] {
  const lines = text.split('\n').filter((line) => line.trim())
  if (lines[0] !== MAPPING_HEADER) {
    throw new FormatError(`missing mapping header '${MAPPING_HEADER}'`)
  }
  const records: MappingRecord[] = []
  for (const line of lines.slice(1)) {
    const fields = line.split(' ')
    if (fields.length !== 3 || fields[0] !== 'M') {
      throw new FormatError(`expected 'M <pattern> <url>', got: ${line}`)
    }
    records.push({
      pattern: decodeURIComponent(fields[1]!),
      representativeUrl: decodeURIComponent(fields[2]!),
    })
  }
  return records
}

/**
 * Manifest and mapping travel as separate files; a refresh must not mix
 * versions. The two are consistent exactly when the mapping's representative
 * URLs are the manifest's CACHE section.
 */
export function assertConsistentBundle(manifest: ParsedManifest, mapping: MappingRecord[]): void {
  const fromManifest = [...manifest.cacheUrls].sort()
  const fromMapping = mapping.map((r) => r.representativeUrl).sort()
  if (
    fromManifest.length !== fromMapping.length ||
    fromManifest.some((url, i) => url !== fromMapping[i])
  ) {
    throw new FormatError('manifest and mapping disagree on the packaged URLs')
  }
}
