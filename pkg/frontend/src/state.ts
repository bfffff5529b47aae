/** Pure state container: reducers applying control-API events, so the
 * live view and a fresh-GET resync always produce the same shape
 * (reload-equivalence). No DOM here. */

import type { Notice, Prompt, SiteStatus } from "./types";

export interface DashboardState {
  prompts: Prompt[];
  sites: SiteStatus[];
  notices: Notice[];
  connected: boolean;
}

export const MAX_NOTICES = 50;

export function initialState(): DashboardState {
  return { prompts: [], sites: [], notices: [], connected: false };
}

/** Replace queue wholesale from GET /api/prompts (resync path). */
export function resyncPrompts(state: DashboardState, prompts: Prompt[]): DashboardState {
  return { ...state, prompts: prompts.filter((p) => p.state === "pending") };
}

export function resyncSites(state: DashboardState, sites: SiteStatus[]): DashboardState {
  return { ...state, sites: [...sites].sort((a, b) => a.origin.localeCompare(b.origin)) };
}

export function applyEvent(state: DashboardState, kind: string, data: unknown): DashboardState {
  switch (kind) {
    case "prompt-created": {
      const prompt = data as Prompt;
      if (state.prompts.some((p) => p.id === prompt.id)) return state;
      return { ...state, prompts: [...state.prompts, prompt] };
    }
    case "prompt-resolved": {
      const prompt = data as Prompt;
      return { ...state, prompts: state.prompts.filter((p) => p.id !== prompt.id) };
    }
    case "notice": {
      const notice = data as Notice;
      const notices = [notice, ...state.notices].slice(0, MAX_NOTICES);
      return { ...state, notices };
    }
    case "status-changed": {
      const status = data as SiteStatus;
      const rest = state.sites.filter((s) => s.origin !== status.origin);
      return resyncSites({ ...state, sites: rest.concat(status) }, rest.concat(status));
    }
    case "decision":
      // The authoritative per-site record arrives via status-changed /
      // resync; decision events only matter for the notices ticker when
      // they carry an inform/block explanation, which "notice" covers.
      return state;
    default:
      return state;
  }
}

export function setConnected(state: DashboardState, connected: boolean): DashboardState {
  if (state.connected === connected) return state;
  return { ...state, connected };
}

/** Age string for a prompt, e.g. "12s" / "3m". */
export function promptAge(createdAt: string, now: Date): string {
  const seconds = Math.max(0, Math.floor((now.getTime() - new Date(createdAt).getTime()) / 1000));
  if (seconds < 60) return `${seconds}s`;
  return `${Math.floor(seconds / 60)}m`;
}
