/**
 * Scripted mock server: serves a package bundle and app resources through
 * the same fetcher interface the service worker uses, recording every
 * request and supporting an offline switch.
 */

import type { FetchedResource } from '../src/wrapper.js'

export const ORIGIN = 'http://app.example'
export const MANIFEST_URL = `${ORIGIN}/rewap/manifest.appcache`
export const MAPPING_URL_TEMPLATE = `${ORIGIN}/rewap/mapping_v{version}.txt`

export interface ScriptedResource {
  url: string
  body: string
  /** anchored regex; defaults to exact match on the URL */
  pattern?: string
  contentType?: string
}

const encoder = new TextEncoder()

export function escapeRegex(text: string): string {
  return text.replace(/[.*+?^${}()|[\]\\]/g, '\\$&')
}

export class MockServer {
  requests: string[] = []
  offline = false
  private manifestText = ''
  private mappings = new Map<string, string>()
  private resources = new Map<string, { body: string; contentType: string }>()

  /** Publish a package version: emits manifest + mapping in the engine's
   * formats and (re)scripts the member resources. */
  adopt(version: number, members: ScriptedResource[]): void {
    const sorted = [...members].sort((a, b) => (a.url < b.url ? -1 : 1))
    this.manifestText =
      'CACHE MANIFEST\n' +
      `# v${version} ${1_600_000_000 + version * 1800}\n` +
      'CACHE:\n' +
      sorted.map((m) => `${m.url}\n`).join('') +
      'NETWORK:\n*\n'
    const records = sorted
      .map((m) => ({ pattern: m.pattern ?? `^${escapeRegex(m.url)}$`, url: m.url }))
      .sort((a, b) => (a.pattern < b.pattern ? -1 : 1))
    this.mappings.set(
      MAPPING_URL_TEMPLATE.replace('{version}', String(version)),
      '#rewap-mapping v1\n' +
        records
          .map((r) => `M ${encodeURIComponent(r.pattern)} ${encodeURIComponent(r.url)}\n`)
          .join(''),
    )
    for (const member of members) {
      this.script(member)
    }
  }

  script(resource: ScriptedResource): void {
    this.resources.set(resource.url, {
      body: resource.body,
      contentType: resource.contentType ?? 'application/octet-stream',
    })
  }

  unscript(url: string): void {
    this.resources.delete(url)
  }

  body(url: string): string {
    const resource = this.resources.get(url)
    if (!resource) throw new Error(`not scripted: ${url}`)
    return resource.body
  }

  cacheUrls(): string[] {
    return this.manifestText.split('\n').filter((line) => line.startsWith('http'))
  }

  requestsFor(urls: string[]): string[] {
    return this.requests.filter((u) => urls.includes(u))
  }

  fetcher = async (url: string): Promise<FetchedResource> => {
    if (this.offline) {
      throw new Error(`network disabled (${url})`)
    }
    this.requests.push(url)
    if (url === MANIFEST_URL) {
      return { body: encoder.encode(this.manifestText), contentType: 'text/cache-manifest' }
    }
    const mapping = this.mappings.get(url)
    if (mapping !== undefined) {
      return { body: encoder.encode(mapping), contentType: 'text/plain' }
    }
    const resource = this.resources.get(url)
    if (resource !== undefined) {
      return { body: encoder.encode(resource.body), contentType: resource.contentType }
    }
    throw new Error(`404 ${url}`)
  }
}
