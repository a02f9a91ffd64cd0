import { describe, expect, it } from 'vitest'

import { FormatError, assertConsistentBundle, parseManifest, parseMapping } from '../src/formats.js'

// Byte-for-byte output of the package engine for the motivating scenario;
// the wrapper must consume these exact formats.
const ENGINE_MANIFEST =
  'CACHE MANIFEST\n' +
  '# v2 1600003600\n' +
  'CACHE:\n' +
  'http://m.foo.com/a.css\n' +
  'http://m.foo.com/b.js\n' +
  'http://m.foo.com/bg.png\n' +
  'http://m.foo.com/d.jpg?184\n' +
  'http://m.foo.com/index.html\n' +
  'NETWORK:\n' +
  '*\n'

const ENGINE_MAPPING =
  '#rewap-mapping v1\n' +
  'M %5Ehttp%3A%2F%2Fm%5C.foo%5C.com%2Fa%5C.css%24 http%3A%2F%2Fm.foo.com%2Fa.css\n' +
  'M %5Ehttp%3A%2F%2Fm%5C.foo%5C.com%2Fb%5C.js%24 http%3A%2F%2Fm.foo.com%2Fb.js\n' +
  'M %5Ehttp%3A%2F%2Fm%5C.foo%5C.com%2Fbg%5C.png%24 http%3A%2F%2Fm.foo.com%2Fbg.png\n' +
  'M %5Ehttp%3A%2F%2Fm%5C.foo%5C.com%2Fd%5C.jpg%5C%3F.%2A%24 http%3A%2F%2Fm.foo.com%2Fd.jpg%3F184\n' +
  'M %5Ehttp%3A%2F%2Fm%5C.foo%5C.com%2Findex%5C.html%24 http%3A%2F%2Fm.foo.com%2Findex.html\n'

const ENGINE_EMPTY_MANIFEST = 'CACHE MANIFEST\n# v1 1600000000\nCACHE:\nNETWORK:\n*\n'

describe('parseManifest', () => {
  it('parses the engine output byte-for-byte', () => {
    const manifest = parseManifest(ENGINE_MANIFEST)
    expect(manifest.version).toBe(2)
    expect(manifest.createdAtS).toBe(1600003600)
    expect(manifest.cacheUrls).toEqual([
      'http://m.foo.com/a.css',
      'http://m.foo.com/b.js',
      'http://m.foo.com/bg.png',
      'http://m.foo.com/d.jpg?184',
      'http://m.foo.com/index.html',
    ])
    expect(manifest.networkWildcard).toBe(true)
  })

  it('parses an empty package manifest', () => {
    const manifest = parseManifest(ENGINE_EMPTY_MANIFEST)
    expect(manifest.version).toBe(1)
    expect(manifest.cacheUrls).toEqual([])
    expect(manifest.networkWildcard).toBe(true)
  })

  it('rejects a missing magic line', () => {
    expect(() => parseManifest('APPCACHE?\n')).toThrow(FormatError)
  })

  it('rejects a missing version comment', () => {
    expect(() => parseManifest('CACHE MANIFEST\nCACHE:\n')).toThrow(/version/i)
  })

  it('rejects entries outside sections', () => {
    expect(() =>
      parseManifest('CACHE MANIFEST\n# v1 0\nhttp://m.foo.com/a.css\n'),
    ).toThrow(/outside any section/)
  })
})

describe('parseMapping', () => {
  it('decodes the engine output, patterns compiling to working matchers', () => {
    const records = parseMapping(ENGINE_MAPPING)
    expect(records).toHaveLength(5)
    const djpg = records.find((r) => r.representativeUrl === 'http://m.foo.com/d.jpg?184')
    expect(djpg).toBeDefined()
    const re = new RegExp(djpg!.pattern)
    expect(re.test('http://m.foo.com/d.jpg?184')).toBe(true)
    expect(re.test('http://m.foo.com/d.jpg?0.7351')).toBe(true)
    expect(re.test('http://m.foo.com/e.jpg?184')).toBe(false)
  })

  it('rejects a missing header', () => {
    expect(() => parseMapping('M a b\n')).toThrow(/header/)
  })

  it('rejects malformed records', () => {
    expect(() => parseMapping('#rewap-mapping v1\nM only-two\n')).toThrow(/expected 'M/)
  })
})

describe('assertConsistentBundle', () => {
  it('accepts a matching pair', () => {
    expect(() =>
      assertConsistentBundle(parseManifest(ENGINE_MANIFEST), parseMapping(ENGINE_MAPPING)),
    ).not.toThrow()
  })

  it('rejects a mapping from another version', () => {
    const stale = parseMapping(ENGINE_MAPPING).slice(0, 4)
    expect(() => assertConsistentBundle(parseManifest(ENGINE_MANIFEST), stale)).toThrow(
      /disagree/,
    )
  })
})
