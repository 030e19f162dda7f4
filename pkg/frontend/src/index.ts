export {
  OmapEvalClient,
  ServiceError,
  type EvaluateOptions,
  type EvaluateResult,
  type EvaluatorInfo,
  type LevelMean,
  type LoadOptions,
} from './client.js';
export {
  MATRIX_FORMAT_VERSION,
  MATRIX_MAGIC,
  MatrixFormatError,
  decodeMatrix,
  encodeMatrix,
  readMatrixFile,
  toNested,
  writeMatrixFile,
  type Matrix,
  type MatrixKind,
} from './matrix.js';
