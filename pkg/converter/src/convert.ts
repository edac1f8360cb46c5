/**
 * Convert an upstream PEMS archive (npz + distance CSV) into the DWAF
 * dataset layout: data.dwaf, data.meta.yaml, adjacency.csv, verification.yaml.
 */

import { createHash } from 'node:crypto';
import { mkdirSync, readFileSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';

import { encodeMetadata, encodeTensor } from './format.js';
import { readNpz } from './npz.js';

export interface ConvertOptions {
  npzPath: string;
  distancesPath: string;
  outDir: string;
  sampleRateMinutes: number;
  startTimestamp: string | null;
}

export interface ConvertReport {
  length: number;
  numNodes: number;
  channels: number;
  min: number;
  max: number;
  sha256: string;
  edges: number;
}

export function parseDistanceCsv(text: string, numNodes: number): string[][] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) throw new Error('empty distance csv');
  let rows = lines;
  const first = lines[0].toLowerCase().replace(/\s/g, '');
  if (first.startsWith('from,to,cost')) {
    rows = lines.slice(1);
  }
  const edges: string[][] = [];
  rows.forEach((line, idx) => {
    const parts = line.split(',').map((p) => p.trim());
    if (parts.length < 3) throw new Error(`malformed distance row ${idx + 1}: '${line}'`);
    const from = Number(parts[0]);
    const to = Number(parts[1]);
    const cost = Number(parts[2]);
    if (!Number.isInteger(from) || !Number.isInteger(to) || !Number.isFinite(cost)) {
      throw new Error(`malformed distance row ${idx + 1}: '${line}'`);
    }
    if (from < 0 || from >= numNodes || to < 0 || to >= numNodes) {
      throw new Error(
        `node id out of range in row ${idx + 1}: (${from}, ${to}) with ${numNodes} nodes`,
      );
    }
    if (cost < 0) throw new Error(`negative cost in row ${idx + 1}: '${line}'`);
    edges.push([String(from), String(to), String(cost)]);
  });
  return edges;
}

export function convert(options: ConvertOptions): ConvertReport {
  const arr = readNpz(readFileSync(options.npzPath), 'data');
  if (arr.shape.length !== 2 && arr.shape.length !== 3) {
    throw new Error(`expected [L, N] or [L, N, C] data, got shape [${arr.shape}]`);
  }
  const [length, numNodes] = arr.shape;
  const channels = arr.shape.length === 3 ? arr.shape[2] : 1;

  // first channel only; the model consumes a single traffic channel
  const traffic = new Float32Array(length * numNodes);
  const bad: string[] = [];
  for (let t = 0; t < length; t++) {
    for (let n = 0; n < numNodes; n++) {
      const v = arr.data[(t * numNodes + n) * channels];
      if (!Number.isFinite(v)) bad.push(`(${t}, ${n})`);
      traffic[t * numNodes + n] = Math.fround(v);
    }
  }
  if (bad.length > 0) {
    throw new Error(`non-finite values at indices: ${bad.slice(0, 10).join(' ')}`);
  }

  const edges = parseDistanceCsv(readFileSync(options.distancesPath, 'utf8'), numNodes);

  mkdirSync(options.outDir, { recursive: true });
  const dataBuf = encodeTensor(traffic, [length, numNodes, 1]);
  writeFileSync(join(options.outDir, 'data.dwaf'), dataBuf);
  writeFileSync(
    join(options.outDir, 'data.meta.yaml'),
    encodeMetadata({
      sample_rate_minutes: options.sampleRateMinutes,
      start_timestamp: options.startTimestamp,
      num_nodes: numNodes,
      channel_names: ['traffic'],
    }),
  );
  const adjacency =
    'from,to,cost\n' + edges.map((e) => e.join(',')).join('\n') + (edges.length ? '\n' : '');
  writeFileSync(join(options.outDir, 'adjacency.csv'), adjacency);

  let min = Infinity;
  let max = -Infinity;
  for (const v of traffic) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  const report: ConvertReport = {
    length,
    numNodes,
    channels,
    min,
    max,
    sha256: createHash('sha256').update(dataBuf).digest('hex'),
    edges: edges.length,
  };
  writeFileSync(
    join(options.outDir, 'verification.yaml'),
    [
      `channels_in_source: ${report.channels}`,
      `edges: ${report.edges}`,
      `length: ${report.length}`,
      `max: ${report.max}`,
      `min: ${report.min}`,
      `num_nodes: ${report.numNodes}`,
      `sha256: ${report.sha256}`,
    ].join('\n') + '\n',
  );
  return report;
}
