/** Binary matrix codec shared with the evaluation service and CLI.
 *
 * Layout: magic "OMAP" | u16 LE format version = 1 | u8 kind
 * (0 = scores, 1 = labels, 2 = weights) | u8 reserved = 0 | u64 LE rows |
 * u64 LE cols | rows*cols IEEE-754 binary32 LE, row-major.
 */

import { readFileSync, writeFileSync } from 'node:fs';

export const MATRIX_MAGIC = 'OMAP';
export const MATRIX_FORMAT_VERSION = 1;
const HEADER_BYTES = 24;

export type MatrixKind = 'scores' | 'labels' | 'weights';

const KIND_BYTE: Record<MatrixKind, number> = { scores: 0, labels: 1, weights: 2 };
const BYTE_KIND: Record<number, MatrixKind> = { 0: 'scores', 1: 'labels', 2: 'weights' };

export interface Matrix {
  kind: MatrixKind;
  rows: number;
  cols: number;
  /** Row-major payload, rows*cols entries. */
  data: Float32Array;
}

export class MatrixFormatError extends Error {}

export function decodeMatrix(buf: Buffer): Matrix {
  if (buf.length < HEADER_BYTES) {
    throw new MatrixFormatError('header truncated');
  }
  if (buf.toString('latin1', 0, 4) !== MATRIX_MAGIC) {
    throw new MatrixFormatError('bad magic bytes');
  }
  const version = buf.readUInt16LE(4);
  if (version !== MATRIX_FORMAT_VERSION) {
    throw new MatrixFormatError(`unsupported format version ${version}`);
  }
  const kindByte = buf.readUInt8(6);
  const kind = BYTE_KIND[kindByte];
  if (kind === undefined || buf.readUInt8(7) !== 0) {
    throw new MatrixFormatError('malformed header');
  }
  const rows = toSafeNumber(buf.readBigUInt64LE(8));
  const cols = toSafeNumber(buf.readBigUInt64LE(16));
  if (rows < 1 || cols < 1) {
    throw new MatrixFormatError(`empty shape ${rows}x${cols}`);
  }
  const expected = rows * cols * 4;
  if (buf.length - HEADER_BYTES !== expected) {
    throw new MatrixFormatError(
      `payload is ${buf.length - HEADER_BYTES} bytes, header implies ${expected}`,
    );
  }
  const data = new Float32Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readFloatLE(HEADER_BYTES + i * 4);
  }
  return { kind, rows, cols, data };
}

export function encodeMatrix(matrix: Matrix): Buffer {
  const { kind, rows, cols, data } = matrix;
  if (data.length !== rows * cols) {
    throw new MatrixFormatError(`payload length ${data.length} does not match ${rows}x${cols}`);
  }
  const buf = Buffer.alloc(HEADER_BYTES + data.length * 4);
  buf.write(MATRIX_MAGIC, 0, 'latin1');
  buf.writeUInt16LE(MATRIX_FORMAT_VERSION, 4);
  buf.writeUInt8(KIND_BYTE[kind], 6);
  buf.writeUInt8(0, 7);
  buf.writeBigUInt64LE(BigInt(rows), 8);
  buf.writeBigUInt64LE(BigInt(cols), 16);
  for (let i = 0; i < data.length; i++) {
    buf.writeFloatLE(data[i], HEADER_BYTES + i * 4);
  }
  return buf;
}

export function readMatrixFile(path: string): Matrix {
  return decodeMatrix(readFileSync(path));
}

export function writeMatrixFile(path: string, matrix: Matrix): void {
  writeFileSync(path, encodeMatrix(matrix));
}

/** Row-major nested arrays, the shape the HTTP API speaks. */
export function toNested(matrix: Matrix): number[][] {
  const out: number[][] = [];
  for (let r = 0; r < matrix.rows; r++) {
    const row = new Array<number>(matrix.cols);
    for (let c = 0; c < matrix.cols; c++) {
      row[c] = matrix.data[r * matrix.cols + c];
    }
    out.push(row);
  }
  return out;
}

function toSafeNumber(value: bigint): number {
  if (value > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new MatrixFormatError(`dimension ${value} exceeds the safe integer range`);
  }
  return Number(value);
}
