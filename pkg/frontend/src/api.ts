import {
  AcceptResponseSchema,
  DefineAcceptResponseSchema,
  DefineCancelResponseSchema,
  GrammarResponseSchema,
  MetricsSchema,
  SessionCreatedSchema,
  SessionsResponseSchema,
  StateSchema,
  SubmitResponseSchema,
  type AcceptResponse,
  type DefineAcceptResponse,
  type Metrics,
  type Rule,
  type SessionState,
  type SubmitResponse,
} from "./types.js";

/** Error body from the service: session guards arrive as {code, message}. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorDetails(res: Response): Promise<{ code: string; message: string }> {
  let code = `http_${res.status}`;
  let message = res.statusText || code;
  try {
    const data: unknown = await res.json();
    const detail = (data as { detail?: unknown }).detail;
    if (typeof detail === "string") {
      message = detail;
    } else if (detail !== null && typeof detail === "object") {
      const d = detail as { code?: unknown; message?: unknown };
      if (typeof d.code === "string") code = d.code;
      message = typeof d.message === "string" ? d.message : JSON.stringify(detail);
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return { code, message };
}

export class ApiClient {
  private writes: Promise<unknown> = Promise.resolve();

  constructor(
    readonly baseUrl: string,
    readonly session: string = "default",
    private readonly fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request(method: "GET" | "POST", path: string, body?: unknown): Promise<unknown> {
    const res = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      const { code, message } = await errorDetails(res);
      throw new ApiError(res.status, code, message);
    }
    return res.json();
  }

  // mutations are chained: at most one write in flight at a time
  private post(path: string, body: Record<string, unknown>): Promise<unknown> {
    const next = this.writes.then(() =>
      this.request("POST", path, { session: this.session, ...body }),
    );
    this.writes = next.catch(() => undefined);
    return next;
  }

  private get(path: string, query: Record<string, string> = {}): Promise<unknown> {
    const params = new URLSearchParams({ session: this.session, ...query });
    return this.request("GET", `${path}?${params}`);
  }

  /** Resolves once every write issued so far has settled. */
  async idle(): Promise<void> {
    let tail;
    do {
      tail = this.writes;
      await tail;
    } while (tail !== this.writes);
  }

  async submit(user: string, utterance: string): Promise<SubmitResponse> {
    return SubmitResponseSchema.parse(await this.post("/submit", { user, utterance }));
  }

  async accept(user: string, index: number): Promise<AcceptResponse> {
    return AcceptResponseSchema.parse(await this.post("/accept", { user, index }));
  }

  async reject(user: string): Promise<SubmitResponse> {
    return SubmitResponseSchema.parse(await this.post("/reject", { user }));
  }

  async defineStart(user: string, head: string): Promise<SubmitResponse> {
    return SubmitResponseSchema.parse(await this.post("/define/start", { user, head }));
  }

  async defineStep(user: string, utterance: string): Promise<SubmitResponse> {
    return SubmitResponseSchema.parse(await this.post("/define/step", { user, utterance }));
  }

  async defineAccept(
    user: string,
    opts: { head?: string; last?: number } = {},
  ): Promise<DefineAcceptResponse> {
    return DefineAcceptResponseSchema.parse(
      await this.post("/define/accept", {
        user,
        head: opts.head ?? null,
        last: opts.last ?? null,
      }),
    );
  }

  async defineCancel(user: string): Promise<number> {
    const data = DefineCancelResponseSchema.parse(
      await this.post("/define/cancel", { user }),
    );
    return data.define_depth;
  }

  async state(): Promise<SessionState> {
    return StateSchema.parse(await this.get("/state"));
  }

  async metrics(window = 50): Promise<Metrics> {
    return MetricsSchema.parse(await this.get("/metrics", { window: String(window) }));
  }

  async grammar(inducedOnly = false): Promise<Rule[]> {
    const data = GrammarResponseSchema.parse(
      await this.get("/grammar", { induced_only: inducedOnly ? "true" : "false" }),
    );
    return data.rules;
  }

  async sessions(): Promise<string[]> {
    const data = SessionsResponseSchema.parse(await this.request("GET", "/sessions"));
    return data.sessions;
  }

  async createSession(name?: string): Promise<string> {
    const data = SessionCreatedSchema.parse(
      await this.request("POST", "/session", { session: name ?? null }),
    );
    return data.session;
  }
}
