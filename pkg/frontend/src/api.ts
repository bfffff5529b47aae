/** Thin typed client for the control API. Every mutation goes through
 * these documented endpoints and nothing else. */

import type {
  FormCheckResult,
  Preset,
  Prompt,
  RepositoryElement,
  RulesetInfo,
  SitePolicy,
  SiteStatus,
} from "./types";

export class ApiError extends Error {
  status: number;
  line: number | null;
  column: number | null;

  constructor(status: number, message: string, line: number | null = null, column: number | null = null) {
    super(message);
    this.status = status;
    this.line = line;
    this.column = column;
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    let payload: unknown = null;
    try {
      payload = await resp.json();
    } catch {
      payload = null;
    }
    if (!resp.ok) {
      const body = (payload ?? {}) as Record<string, unknown>;
      throw new ApiError(
        resp.status,
        typeof body.error === "string" ? body.error : `HTTP ${resp.status}`,
        typeof body.line === "number" ? body.line : null,
        typeof body.column === "number" ? body.column : null,
      );
    }
    return payload as T;
  }

  async getStatus(): Promise<SiteStatus[]> {
    const data = await this.request<{ sites: SiteStatus[] }>("/api/status");
    return data.sites;
  }

  async getPrompts(): Promise<Prompt[]> {
    const data = await this.request<{ prompts: Prompt[] }>("/api/prompts");
    return data.prompts;
  }

  resolvePrompt(id: string, resolution: "allow" | "block", remember: "none" | "session" | "persistent"): Promise<{ resolved: string }> {
    return this.request(`/api/prompts/${id}/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ resolution, remember }),
    });
  }

  getRuleset(): Promise<RulesetInfo> {
    return this.request("/api/ruleset");
  }

  putRuleset(text: string): Promise<{ name: string }> {
    return this.request("/api/ruleset", { method: "PUT", body: text });
  }

  async getPresets(): Promise<Preset[]> {
    const data = await this.request<{ presets: Preset[] }>("/api/presets");
    return data.presets;
  }

  async getRepository(): Promise<RepositoryElement[]> {
    const data = await this.request<{ elements: RepositoryElement[] }>("/api/repository");
    return data.elements;
  }

  putRepositoryValue(path: string, value: string | null): Promise<{ path: string; value: string | null }> {
    return this.request(`/api/repository/${path}`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ value }),
    });
  }

  getSitePolicy(origin: string): Promise<SitePolicy> {
    return this.request(`/api/sites/${encodeURIComponent(origin)}/policy`);
  }

  checkForm(origin: string, requestText: string): Promise<FormCheckResult> {
    return this.request("/api/forms/check", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ origin, request: requestText }),
    });
  }

  eventsUrl(): string {
    return this.base + "/api/events";
  }
}
