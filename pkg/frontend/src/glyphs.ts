/** Indicator glyphs as pure functions of SiteStatus. Each glyph pairs a
 * distinct shape with a text label so state is never conveyed by color
 * alone. */

import type { SiteStatus } from "./types";

export interface Glyph {
  symbol: string;
  label: string;
  on: boolean;
}

export function policyGlyph(status: SiteStatus): Glyph {
  return {
    symbol: status["policy-enabled"] ? "■" : "□",
    label: status["policy-enabled"] ? "policy published" : "no policy",
    on: status["policy-enabled"],
  };
}

export function cookiesGlyph(status: SiteStatus): Glyph {
  return {
    symbol: status["cookies-seen"] ? "●" : "○",
    label: status["cookies-seen"] ? "sets cookies" : "no cookies seen",
    on: status["cookies-seen"],
  };
}

export function sealGlyph(status: SiteStatus): Glyph {
  const has = status.seals.length > 0;
  return {
    symbol: has ? "▲" : "△",
    label: has ? `seal: ${status.seals.join(", ")}` : "no seal",
    on: has,
  };
}

const BADGES: Record<string, string> = {
  accept: "✓ accept",
  inform: "i inform",
  warn: "? warn",
  block: "✕ block",
};

export function decisionBadge(status: SiteStatus): string {
  const decision = status["last-decision"];
  if (!decision) return "– none";
  return BADGES[decision.action] ?? decision.action;
}
