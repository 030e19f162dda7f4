/** Parity tests against the evaluation service on the shared golden fixture.
 *
 * Spawns the Python service, loads the path-graph ontology through it, and
 * checks that evaluate/obce-weights reproduce the checked-in CLI outputs.
 */

import { type ChildProcess, spawn } from 'node:child_process';
import { readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import {
  OmapEvalClient,
  ServiceError,
  decodeMatrix,
  encodeMatrix,
  readMatrixFile,
  toNested,
  writeMatrixFile,
  type Matrix,
} from '../src/index.js';

const DATA_DIR = fileURLToPath(new URL('../../tests/data/', import.meta.url));
const PORT = 18000 + Math.floor(Math.random() * 2000);
const BASE_URL = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let client: OmapEvalClient;
let evaluatorId: string;

interface GoldenReport {
  map: number;
  omap: number;
  omap0: number;
  omap_level: { level: number; mean_oap: number }[];
}

function goldenReport(): GoldenReport {
  return JSON.parse(readFileSync(join(DATA_DIR, 'golden_report.json'), 'utf-8'));
}

/** The CLI's CSV export keeps full float64 precision, unlike binary float32. */
function goldenWeightsCsv(): number[][] {
  const lines = readFileSync(join(DATA_DIR, 'golden_weights_beta1.csv'), 'utf-8')
    .trim()
    .split('\n')
    .slice(1);
  return lines.map((line) => line.split(',').slice(1).map(Number));
}

beforeAll(async () => {
  server = spawn(
    'python3',
    ['-m', 'uvicorn', 'omap_eval.service:app', '--host', '127.0.0.1', '--port', String(PORT)],
    { stdio: 'ignore' },
  );
  client = new OmapEvalClient(BASE_URL);
  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      await client.version();
      break;
    } catch {
      if (Date.now() > deadline) throw new Error('service did not come up');
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
  }
  const info = await client.loadEvaluator({
    edgesPath: join(DATA_DIR, 'path_graph.edges'),
    classIndexPath: join(DATA_DIR, 'path_classes.csv'),
  });
  evaluatorId = info.evaluator_id;
});

afterAll(() => {
  server?.kill();
});

describe('evaluator lifecycle', () => {
  it('reports a version string', async () => {
    expect(await client.version()).toMatch(/^\d+\.\d+\.\d+$/);
  });

  it('exposes the graph facts of the loaded ontology', async () => {
    const info = await client.evaluatorInfo(evaluatorId);
    expect(info.n_classes).toBe(4);
    expect(info.n_vertices).toBe(4);
    expect(info.n_edges).toBe(3);
    expect(info.d_max).toBe(3);
    expect(info.mu).toBe(1.25);
  });
});

describe('evaluate parity with the CLI golden report', () => {
  it('matches map/omap/omap0 and per-level means to 1e-12', async () => {
    const scores = readMatrixFile(join(DATA_DIR, 'golden_scores.omap'));
    const labels = readMatrixFile(join(DATA_DIR, 'golden_labels.omap'));
    const result = await client.evaluate(evaluatorId, toNested(scores), toNested(labels));
    const golden = goldenReport();
    expect(Math.abs(result.map - golden.map)).toBeLessThanOrEqual(1e-12);
    expect(Math.abs(result.omap - golden.omap)).toBeLessThanOrEqual(1e-12);
    expect(Math.abs((result.omap0 ?? NaN) - golden.omap0)).toBeLessThanOrEqual(1e-12);
    expect(result.per_level.length).toBe(golden.omap_level.length);
    for (let i = 0; i < result.per_level.length; i++) {
      expect(result.per_level[i].level).toBe(golden.omap_level[i].level);
      expect(
        Math.abs(result.per_level[i].mean_oap - golden.omap_level[i].mean_oap),
      ).toBeLessThanOrEqual(1e-12);
    }
  });

  it('scores a perfect predictor at map = 1', async () => {
    const labels = toNested(readMatrixFile(join(DATA_DIR, 'golden_labels.omap')));
    const result = await client.evaluate(evaluatorId, labels, labels);
    expect(result.map).toBe(1.0);
  });

  it('surfaces validation errors with the core error codes', async () => {
    const error = await client
      .evaluate(evaluatorId, [[0.5, 0.5]], [[1, 0]])
      .then(() => null)
      .catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ServiceError);
    expect((error as ServiceError).code).toBe('class-count-mismatch');
    expect((error as ServiceError).exitCode).toBe(2);
  });
});

describe('obce weights parity with the CLI export', () => {
  it('matches the full-precision CSV export to 1e-12', async () => {
    const labels = toNested(readMatrixFile(join(DATA_DIR, 'golden_labels.omap')));
    const weights = await client.obceWeights(evaluatorId, labels, 1.0);
    const golden = goldenWeightsCsv();
    expect(weights.length).toBe(golden.length);
    for (let r = 0; r < weights.length; r++) {
      for (let c = 0; c < weights[r].length; c++) {
        expect(Math.abs(weights[r][c] - golden[r][c])).toBeLessThanOrEqual(1e-12);
      }
    }
  });

  it('matches the binary export at float32 precision', async () => {
    const labels = toNested(readMatrixFile(join(DATA_DIR, 'golden_labels.omap')));
    const weights = await client.obceWeights(evaluatorId, labels, 1.0);
    const golden = readMatrixFile(join(DATA_DIR, 'golden_weights_beta1.omap'));
    expect(golden.kind).toBe('weights');
    for (let r = 0; r < golden.rows; r++) {
      for (let c = 0; c < golden.cols; c++) {
        expect(Math.abs(weights[r][c] - golden.data[r * golden.cols + c])).toBeLessThanOrEqual(
          1e-6,
        );
      }
    }
  });

  it('returns all ones at beta = 0', async () => {
    const labels = toNested(readMatrixFile(join(DATA_DIR, 'golden_labels.omap')));
    const weights = await client.obceWeights(evaluatorId, labels, 0.0);
    for (const row of weights) {
      for (const value of row) {
        expect(value).toBe(1.0);
      }
    }
  });

  it('rejects empty label rows under the strict policy', async () => {
    const error = await client
      .obceWeights(evaluatorId, [[0, 0, 0, 0]], 1.0)
      .then(() => null)
      .catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ServiceError);
    expect((error as ServiceError).code).toBe('empty-label-row');
  });
});

describe('binary matrix codec', () => {
  it('round-trips through encode/decode byte-identically', () => {
    const matrix: Matrix = {
      kind: 'scores',
      rows: 3,
      cols: 2,
      data: new Float32Array([0.125, 0.5, 0.875, 0.0, 1.0, 0.25]),
    };
    const encoded = encodeMatrix(matrix);
    const decoded = decodeMatrix(encoded);
    expect(decoded).toEqual(matrix);
    expect(encodeMatrix(decoded).equals(encoded)).toBe(true);
  });

  it('reproduces the Python writer byte-for-byte', () => {
    const goldenPath = join(DATA_DIR, 'golden_scores.omap');
    const matrix = readMatrixFile(goldenPath);
    const rewritten = join(tmpdir(), `omap-roundtrip-${process.pid}.omap`);
    writeMatrixFile(rewritten, matrix);
    expect(readFileSync(rewritten).equals(readFileSync(goldenPath))).toBe(true);
  });

  it('rejects truncated payloads', () => {
    const encoded = encodeMatrix({
      kind: 'labels',
      rows: 1,
      cols: 2,
      data: new Float32Array([1, 0]),
    });
    expect(() => decodeMatrix(encoded.subarray(0, encoded.length - 1))).toThrow(/payload/);
  });
});
