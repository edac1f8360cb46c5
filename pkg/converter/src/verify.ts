/** Re-check a converted dataset directory against its verification record. */

import { createHash } from 'node:crypto';
import { readFileSync } from 'node:fs';
import { join } from 'node:path';

import { decodeTensor } from './format.js';

export interface VerifyReport {
  ok: boolean;
  problems: string[];
  length?: number;
  numNodes?: number;
}

function parseSimpleYaml(text: string): Record<string, string> {
  const out: Record<string, string> = {};
  for (const line of text.split(/\r?\n/)) {
    const m = /^([A-Za-z0-9_]+):\s*(.*)$/.exec(line);
    if (m) out[m[1]] = m[2];
  }
  return out;
}

export function verify(dir: string): VerifyReport {
  const problems: string[] = [];
  let length: number | undefined;
  let numNodes: number | undefined;

  let dataBuf: Buffer | undefined;
  try {
    dataBuf = readFileSync(join(dir, 'data.dwaf'));
    const tensor = decodeTensor(dataBuf);
    [length, numNodes] = tensor.shape;
  } catch (err) {
    problems.push(`data.dwaf: ${(err as Error).message}`);
  }

  const record = parseSimpleYaml(readFileSync(join(dir, 'verification.yaml'), 'utf8'));
  if (dataBuf) {
    const sha = createHash('sha256').update(dataBuf).digest('hex');
    if (record.sha256 !== sha) {
      problems.push(`checksum mismatch: recorded ${record.sha256}, recomputed ${sha}`);
    }
  }
  if (length !== undefined && record.length !== String(length)) {
    problems.push(`length mismatch: recorded ${record.length}, file has ${length}`);
  }

  const meta = parseSimpleYaml(readFileSync(join(dir, 'data.meta.yaml'), 'utf8'));
  const metaNodes = Number(meta.num_nodes);
  if (numNodes !== undefined && metaNodes !== numNodes) {
    problems.push(`metadata num_nodes=${metaNodes} but data has ${numNodes} nodes`);
  }

  const adjacency = readFileSync(join(dir, 'adjacency.csv'), 'utf8');
  const lines = adjacency.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines[0]?.toLowerCase().replace(/\s/g, '') !== 'from,to,cost') {
    problems.push(`adjacency.csv: bad header '${lines[0]}'`);
  }
  const bound = numNodes ?? metaNodes;
  lines.slice(1).forEach((line, idx) => {
    const [from, to] = line.split(',').map(Number);
    if (!(from >= 0 && from < bound && to >= 0 && to < bound)) {
      problems.push(`adjacency.csv row ${idx + 2}: id out of range (${from}, ${to})`);
    }
  });

  return { ok: problems.length === 0, problems, length, numNodes };
}
