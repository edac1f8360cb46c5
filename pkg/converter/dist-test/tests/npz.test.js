import assert from 'node:assert/strict';
import { describe, it } from 'node:test';
import { deflateRawSync } from 'node:zlib';
import { parseNpy, readNpz, unzip } from '../src/npz.js';
import { encodeNpy, writeNpz, writeZip } from './helpers.js';
describe('npy parsing', () => {
    it('reads little-endian float64', () => {
        const arr = parseNpy(encodeNpy([1.5, -2, 3e10, 0.125], [2, 2]));
        assert.deepEqual(arr.shape, [2, 2]);
        assert.deepEqual([...arr.data], [1.5, -2, 3e10, 0.125]);
    });
    it('reads float32 and int64', () => {
        const f = parseNpy(encodeNpy([0.5, -1.25], [2], '<f4'));
        assert.deepEqual([...f.data], [0.5, -1.25]);
        const i = parseNpy(encodeNpy([1, -9007199254740991], [2], '<i8'));
        assert.deepEqual([...i.data], [1, -9007199254740991]);
    });
    it('handles 1-tuple shapes', () => {
        assert.deepEqual(parseNpy(encodeNpy([42], [1])).shape, [1]);
    });
    it('rejects fortran order', () => {
        const buf = encodeNpy([1, 2], [2]);
        const patched = Buffer.from(buf.toString('latin1').replace("'fortran_order': False", "'fortran_order': True "), 'latin1');
        assert.throws(() => parseNpy(patched), /fortran/);
    });
    it('rejects bad magic', () => {
        assert.throws(() => parseNpy(Buffer.from('not an npy file')), /magic/);
    });
    it('rejects unsupported dtypes', () => {
        const buf = encodeNpy([1], [1]);
        const patched = Buffer.from(buf.toString('latin1').replace('<f8', '>f8'), 'latin1');
        assert.throws(() => parseNpy(patched), /dtype/);
    });
});
describe('zip handling', () => {
    it('extracts stored members', () => {
        const zip = writeZip({ 'a.txt': Buffer.from('hello'), 'b.bin': Buffer.from([0, 255]) });
        const entries = unzip(zip);
        assert.equal(entries.get('a.txt')?.toString(), 'hello');
        assert.deepEqual([...entries.get('b.bin')], [0, 255]);
    });
    it('extracts deflated members', () => {
        const payload = Buffer.from('x'.repeat(1000));
        const compressed = deflateRawSync(payload);
        // hand-roll one deflated member since the helper only writes stored
        const name = Buffer.from('big.txt');
        const local = Buffer.alloc(30);
        local.writeUInt32LE(0x04034b50, 0);
        local.writeUInt16LE(8, 8); // method: deflate
        local.writeUInt32LE(compressed.length, 18);
        local.writeUInt32LE(payload.length, 22);
        local.writeUInt16LE(name.length, 26);
        const central = Buffer.alloc(46);
        central.writeUInt32LE(0x02014b50, 0);
        central.writeUInt16LE(8, 10);
        central.writeUInt32LE(compressed.length, 20);
        central.writeUInt32LE(payload.length, 24);
        central.writeUInt16LE(name.length, 28);
        central.writeUInt32LE(0, 42);
        const centralBuf = Buffer.concat([central, name]);
        const localBuf = Buffer.concat([local, name, compressed]);
        const eocd = Buffer.alloc(22);
        eocd.writeUInt32LE(0x06054b50, 0);
        eocd.writeUInt16LE(1, 8);
        eocd.writeUInt16LE(1, 10);
        eocd.writeUInt32LE(centralBuf.length, 12);
        eocd.writeUInt32LE(localBuf.length, 16);
        const entries = unzip(Buffer.concat([localBuf, centralBuf, eocd]));
        assert.ok(entries.get('big.txt')?.equals(payload));
    });
    it('tolerates a trailing zip comment', () => {
        const zip = writeZip({ 'a.txt': Buffer.from('x') });
        const comment = Buffer.from('comment after eocd');
        const withComment = Buffer.concat([zip, comment]);
        withComment.writeUInt16LE(comment.length, zip.length - 2);
        assert.equal(unzip(withComment).get('a.txt')?.toString(), 'x');
    });
    it('rejects non-zip input', () => {
        assert.throws(() => unzip(Buffer.alloc(100)), /end-of-central-directory/);
    });
});
describe('readNpz', () => {
    it('finds the named member with .npy suffix', () => {
        const zip = writeNpz({ data: { values: [1, 2, 3, 4, 5, 6], shape: [3, 2] } });
        const arr = readNpz(zip, 'data');
        assert.deepEqual(arr.shape, [3, 2]);
        assert.equal(arr.data[5], 6);
    });
    it('reports available keys when missing', () => {
        const zip = writeNpz({ other: { values: [1], shape: [1] } });
        assert.throws(() => readNpz(zip, 'data'), /missing from npz.*other/);
    });
});
