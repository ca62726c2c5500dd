/** Session API client with revision tracking.
 *
 *  Every mutation sends the client's current revision; the server answers
 *  409 when it is stale (someone else edited) and 422 when a curve violates
 *  an invariant. Those become typed errors so the UI can branch. */

export interface StyleDoc {
  side: string;
  n_tokens: number;
  frames: number;
  scores: number[][];
  edited: boolean;
}

export interface StyleBundleDoc {
  text: StyleDoc | null;
  pitch: StyleDoc | null;
}

export interface F0Doc {
  sample_rate: number;
  hop: number;
  f0_hz: number[];
}

export interface SessionMeta {
  id: string;
  revision: number;
  mel_revision: number;
  frames: number;
  seed: number;
}

export class ConflictError extends Error {
  constructor(public expected: number, public got: number) {
    super(`revision conflict: server at ${expected}, client sent ${got}`);
  }
}

export class CurveError extends Error {
  constructor(public field: string, message: string) {
    super(message);
  }
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function raise(resp: Response): Promise<never> {
  let body: Record<string, unknown> = {};
  try {
    body = (await resp.json()) as Record<string, unknown>;
  } catch {
    /* non-JSON error body */
  }
  if (resp.status === 409) {
    throw new ConflictError(Number(body.expected ?? -1), Number(body.got ?? -1));
  }
  if (resp.status === 422) {
    throw new CurveError(String(body.field ?? ""), String(body.message ?? body.error ?? "invalid"));
  }
  throw new ApiError(resp.status, String(body.message ?? body.error ?? resp.statusText));
}

export class SessionClient {
  revision = 0;
  melRevision = 0;

  constructor(
    public baseUrl: string,
    public sessionId: string = "",
    private fetchImpl: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  private track(meta: { revision?: number; mel_revision?: number }): void {
    if (typeof meta.revision === "number") this.revision = meta.revision;
    if (typeof meta.mel_revision === "number") this.melRevision = meta.mel_revision;
  }

  async createSession(score: unknown, seed = 0): Promise<SessionMeta> {
    const resp = await this.fetchImpl(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ score, seed }),
    });
    if (!resp.ok) await raise(resp);
    const meta = (await resp.json()) as SessionMeta;
    this.sessionId = meta.id;
    this.track(meta);
    return meta;
  }

  async getMeta(): Promise<SessionMeta> {
    const resp = await this.fetchImpl(this.url(`/sessions/${this.sessionId}`));
    if (!resp.ok) await raise(resp);
    const meta = (await resp.json()) as SessionMeta;
    this.track(meta);
    return meta;
  }

  async getStyle(): Promise<StyleBundleDoc> {
    const resp = await this.fetchImpl(this.url(`/sessions/${this.sessionId}/style`));
    if (!resp.ok) await raise(resp);
    const body = (await resp.json()) as { revision: number; mel_revision: number; style: StyleBundleDoc };
    this.track(body);
    return body.style;
  }

  async getF0(): Promise<F0Doc> {
    const resp = await this.fetchImpl(this.url(`/sessions/${this.sessionId}/f0`));
    if (!resp.ok) await raise(resp);
    const body = (await resp.json()) as { revision: number; mel_revision: number; f0: F0Doc };
    this.track(body);
    return body.f0;
  }

  async getMel(): Promise<ArrayBuffer> {
    const resp = await this.fetchImpl(this.url(`/sessions/${this.sessionId}/mel`));
    if (!resp.ok) await raise(resp);
    const rev = resp.headers.get("X-Session-Revision");
    if (rev) this.revision = Number(rev);
    const melRev = resp.headers.get("X-Mel-Revision");
    if (melRev) this.melRevision = Number(melRev);
    return await resp.arrayBuffer();
  }

  async putF0(doc: F0Doc): Promise<number> {
    const resp = await this.fetchImpl(this.url(`/sessions/${this.sessionId}/f0`), {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ revision: this.revision, f0: doc }),
    });
    if (!resp.ok) await raise(resp);
    const body = (await resp.json()) as { revision: number };
    this.track(body);
    return body.revision;
  }

  async putStyle(bundle: StyleBundleDoc): Promise<number> {
    const resp = await this.fetchImpl(this.url(`/sessions/${this.sessionId}/style`), {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ revision: this.revision, style: bundle }),
    });
    if (!resp.ok) await raise(resp);
    const body = (await resp.json()) as { revision: number };
    this.track(body);
    return body.revision;
  }

  async resynthesize(): Promise<StyleBundleDoc> {
    const resp = await this.fetchImpl(
      this.url(`/sessions/${this.sessionId}/resynthesize`),
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ revision: this.revision }),
      },
    );
    if (!resp.ok) await raise(resp);
    const body = (await resp.json()) as {
      revision: number;
      mel_revision: number;
      style: StyleBundleDoc;
    };
    this.track(body);
    return body.style;
  }

  audioUrl(): string {
    return this.url(
      `/sessions/${this.sessionId}/audio.wav?rev=${this.melRevision}`,
    );
  }
}
