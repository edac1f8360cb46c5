#!/usr/bin/env node
/**
 * Usage:
 *   dwafm-convert convert <data.npz> <distances.csv> [--rate 5] [--start ISO8601] -o <dir>
 *   dwafm-convert verify <dir>
 */
import { convert } from './convert.js';
import { verify } from './verify.js';
function usage() {
    console.error('usage: convert <npz> <distances.csv> [--rate MIN] [--start ISO8601] -o <dir> | verify <dir>');
    process.exit(2);
}
export function main(argv) {
    const [command, ...rest] = argv;
    if (command === 'convert') {
        const positional = [];
        let rate = 5;
        let start = null;
        let outDir = null;
        for (let i = 0; i < rest.length; i++) {
            const a = rest[i];
            if (a === '--rate')
                rate = Number(rest[++i]);
            else if (a === '--start')
                start = rest[++i];
            else if (a === '-o' || a === '--out')
                outDir = rest[++i];
            else
                positional.push(a);
        }
        if (positional.length !== 2 || !outDir || !Number.isFinite(rate) || rate <= 0)
            usage();
        const report = convert({
            npzPath: positional[0],
            distancesPath: positional[1],
            outDir,
            sampleRateMinutes: rate,
            startTimestamp: start,
        });
        console.log(`converted: L=${report.length} N=${report.numNodes} ` +
            `(source channels: ${report.channels}) min=${report.min} max=${report.max}`);
        console.log(`edges: ${report.edges}  sha256: ${report.sha256}`);
        return 0;
    }
    if (command === 'verify') {
        if (rest.length !== 1)
            usage();
        const report = verify(rest[0]);
        if (report.ok) {
            console.log(`verify ok: L=${report.length} N=${report.numNodes}`);
            return 0;
        }
        for (const p of report.problems)
            console.error(`verify FAIL: ${p}`);
        return 1;
    }
    usage();
}
import { pathToFileURL } from 'node:url';
if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
    process.exit(main(process.argv.slice(2)));
}
