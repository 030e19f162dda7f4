/** HTTP client for the evaluation service.
 *
 * The service owns the ontology: loading one returns a reusable evaluator
 * id, and score/label matrices travel as row-major nested number arrays.
 * Field names mirror the wire format exactly.
 */

export interface EvaluatorInfo {
  evaluator_id: string;
  n_classes: number;
  n_vertices: number;
  n_edges: number;
  d_max: number;
  mu: number;
  ontology_digest: string;
}

export interface LoadOptions {
  classIndexPath: string;
  ontologyPath?: string;
  edgesPath?: string;
}

export interface EvaluateOptions {
  levels?: number[];
  includeTopLevel?: boolean;
  emptyLabels?: 'error' | 'max-weight';
  zeroPositive?: 'skip' | 'error';
  threads?: number;
}

export interface LevelMean {
  level: number;
  mean_oap: number;
}

export interface EvaluateResult {
  map: number;
  omap: number;
  omap0: number | null;
  per_level: LevelMean[];
  skipped_classes: string[];
}

/** Error raised for service responses carrying a toolkit error body. */
export class ServiceError extends Error {
  constructor(
    readonly code: string,
    readonly exitCode: number,
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ServiceError';
  }
}

export class OmapEvalClient {
  constructor(readonly baseUrl: string) {}

  async version(): Promise<string> {
    const body = await this.request<{ status: string; version: string }>('GET', '/health');
    return body.version;
  }

  /** Load an ontology + class index from service-local files. Idempotent. */
  async loadEvaluator(options: LoadOptions): Promise<EvaluatorInfo> {
    return this.request<EvaluatorInfo>('POST', '/evaluators', {
      class_index_path: options.classIndexPath,
      ontology_path: options.ontologyPath ?? null,
      edges_path: options.edgesPath ?? null,
    });
  }

  async evaluatorInfo(evaluatorId: string): Promise<EvaluatorInfo> {
    return this.request<EvaluatorInfo>('GET', `/evaluators/${evaluatorId}`);
  }

  async evaluate(
    evaluatorId: string,
    scores: number[][],
    labels: number[][],
    options: EvaluateOptions = {},
  ): Promise<EvaluateResult> {
    return this.request<EvaluateResult>('POST', `/evaluators/${evaluatorId}/evaluate`, {
      scores,
      labels,
      levels: options.levels ?? null,
      include_top_level: options.includeTopLevel ?? false,
      empty_labels: options.emptyLabels ?? 'error',
      zero_positive: options.zeroPositive ?? 'skip',
      threads: options.threads ?? 1,
    });
  }

  async obceWeights(
    evaluatorId: string,
    labels: number[][],
    beta: number,
    emptyLabels: 'error' | 'ones' = 'error',
  ): Promise<number[][]> {
    const body = await this.request<{ weights: number[][]; beta: number }>(
      'POST',
      `/evaluators/${evaluatorId}/obce-weights`,
      { labels, beta, empty_labels: emptyLabels },
    );
    return body.weights;
  }

  private async request<T>(method: string, path: string, payload?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: payload === undefined ? undefined : { 'content-type': 'application/json' },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
    const body = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      if (typeof body.code === 'string') {
        throw new ServiceError(
          body.code,
          typeof body.exit_code === 'number' ? body.exit_code : 0,
          response.status,
          typeof body.message === 'string' ? body.message : body.code,
        );
      }
      throw new ServiceError('http-error', 0, response.status, JSON.stringify(body));
    }
    return body as T;
  }
}
