/**
 * DWAF binary tensor format (little-endian):
 *   magic 'DWAF' | u32 version=1 | u8 dtype (1 = float32) | u8 ndim |
 *   2 zero pad bytes | ndim x u64 dims | row-major float32 payload
 */
export const MAGIC = 'DWAF';
export const VERSION = 1;
export const DTYPE_F32 = 1;
export function encodeTensor(data, shape) {
    const count = shape.reduce((a, b) => a * b, 1);
    if (count !== data.length) {
        throw new Error(`shape ${shape} does not match ${data.length} values`);
    }
    const header = Buffer.alloc(12 + 8 * shape.length);
    header.write(MAGIC, 0, 'ascii');
    header.writeUInt32LE(VERSION, 4);
    header.writeUInt8(DTYPE_F32, 8);
    header.writeUInt8(shape.length, 9);
    shape.forEach((dim, i) => header.writeBigUInt64LE(BigInt(dim), 12 + 8 * i));
    const payload = Buffer.alloc(data.length * 4);
    for (let i = 0; i < data.length; i++)
        payload.writeFloatLE(data[i], i * 4);
    return Buffer.concat([header, payload]);
}
export function decodeTensor(buf) {
    if (buf.length < 12)
        throw new Error('file shorter than fixed header');
    if (buf.toString('ascii', 0, 4) !== MAGIC) {
        throw new Error(`bad magic ${JSON.stringify(buf.toString('latin1', 0, 4))}`);
    }
    const version = buf.readUInt32LE(4);
    if (version !== VERSION)
        throw new Error(`unsupported version ${version}`);
    const dtype = buf.readUInt8(8);
    if (dtype !== DTYPE_F32)
        throw new Error(`unknown dtype code ${dtype}`);
    const ndim = buf.readUInt8(9);
    const dimsEnd = 12 + 8 * ndim;
    if (buf.length < dimsEnd)
        throw new Error('truncated dimension block');
    const shape = [];
    for (let i = 0; i < ndim; i++)
        shape.push(Number(buf.readBigUInt64LE(12 + 8 * i)));
    const count = shape.reduce((a, b) => a * b, 1);
    const expected = count * 4;
    const actual = buf.length - dimsEnd;
    if (actual < expected) {
        throw new Error(`truncated payload: ${actual} bytes present, header declares ${expected}`);
    }
    if (actual > expected) {
        throw new Error(`oversized payload: ${actual} bytes present, header declares ${expected}`);
    }
    const data = new Float32Array(count);
    for (let i = 0; i < count; i++)
        data[i] = buf.readFloatLE(dimsEnd + i * 4);
    return { data, shape };
}
/** Emit the sidecar metadata as plain YAML (keys sorted, stable output). */
export function encodeMetadata(meta) {
    const lines = [
        `channel_names:`,
        ...meta.channel_names.map((c) => `- ${c}`),
        `num_nodes: ${meta.num_nodes}`,
        `sample_rate_minutes: ${meta.sample_rate_minutes}`,
        `start_timestamp: ${meta.start_timestamp === null ? 'null' : `'${meta.start_timestamp}'`}`,
    ];
    return lines.join('\n') + '\n';
}
