/** DOM rendering for the four views. Render functions are pure-ish:
 * state in, elements out, user intent reported through callbacks —
 * mutations never happen here directly. */

import { cookiesGlyph, decisionBadge, policyGlyph, sealGlyph, type Glyph } from "./glyphs";
import { promptAge } from "./state";
import type { AnnotatedForm, FormCheckResult, Prompt, RepositoryElement, SiteStatus } from "./types";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  for (const child of children) node.append(child);
  return node;
}

export function renderBanner(connected: boolean): HTMLElement {
  if (connected) return el("div", { class: "banner hidden", "data-testid": "banner" });
  return el(
    "div",
    { class: "banner degraded", "data-testid": "banner", role: "alert" },
    ["Event stream disconnected — reconnecting. Displayed data may be stale."],
  );
}

export interface PromptCallbacks {
  onResolve: (id: string, resolution: "allow" | "block", remember: "none" | "session" | "persistent") => void;
}

export function renderPromptCard(prompt: Prompt, now: Date, callbacks: PromptCallbacks): HTMLElement {
  const remember = el("select", { "data-testid": "remember" }, [
    el("option", { value: "none" }, ["just this once"]),
    el("option", { value: "session" }, ["remember this session"]),
    el("option", { value: "persistent" }, ["remember always"]),
  ]);
  const chosen = () => remember.value as "none" | "session" | "persistent";
  const allow = el("button", { class: "allow", "data-testid": "allow" }, ["Allow"]);
  allow.onclick = () => callbacks.onResolve(prompt.id, "allow", chosen());
  const block = el("button", { class: "block", "data-testid": "block" }, ["Block"]);
  block.onclick = () => callbacks.onResolve(prompt.id, "block", chosen());

  const children: (Node | string)[] = [
    el("h3", {}, [prompt.origin]),
    el("p", { class: "age" }, [`waiting ${promptAge(prompt["created-at"], now)}`]),
    el("p", { class: "explanation" }, [prompt.decision.explanation]),
    el("pre", { class: "summary" }, [prompt.summary]),
  ];
  if (prompt["disclosure-uri"]) {
    children.push(
      el("p", {}, [el("a", { href: prompt["disclosure-uri"], target: "_blank" }, ["Site policy page"])]),
    );
  }
  children.push(el("div", { class: "actions" }, [allow, block, remember]));
  return el("article", { class: "prompt", "data-prompt-id": prompt.id }, children);
}

function glyphSpan(glyph: Glyph): HTMLElement {
  return el(
    "span",
    { class: glyph.on ? "glyph on" : "glyph off", title: glyph.label, "aria-label": glyph.label },
    [`${glyph.symbol} ${glyph.label}`],
  );
}

export interface SiteCallbacks {
  onShowPolicy: (origin: string) => void;
}

export function renderSiteRow(status: SiteStatus, callbacks: SiteCallbacks): HTMLElement {
  const cells: HTMLElement[] = [
    el("td", { class: "origin" }, [status.origin]),
    el("td", {}, [glyphSpan(policyGlyph(status))]),
    el("td", {}, [glyphSpan(cookiesGlyph(status))]),
    el("td", {}, [glyphSpan(sealGlyph(status))]),
    el("td", { class: "badge" }, [decisionBadge(status)]),
  ];
  const actions = el("td", {});
  const policyButton = el("button", { "data-testid": "show-policy" }, ["Policy"]);
  policyButton.onclick = () => callbacks.onShowPolicy(status.origin);
  actions.append(policyButton);
  if (status["disclosure-uri"]) {
    actions.append(
      el("a", { href: status["disclosure-uri"], target: "_blank", class: "disclosure" }, ["Disclosure"]),
    );
  }
  cells.push(actions);
  return el("tr", { "data-origin": status.origin }, cells);
}

export function renderSitesTable(sites: SiteStatus[], callbacks: SiteCallbacks): HTMLElement {
  const header = el("tr", {}, [
    el("th", {}, ["Origin"]),
    el("th", {}, ["Policy"]),
    el("th", {}, ["Cookies"]),
    el("th", {}, ["Seal"]),
    el("th", {}, ["Last decision"]),
    el("th", {}, [""]),
  ]);
  const body = sites.map((s) => renderSiteRow(s, callbacks));
  return el("table", { class: "sites" }, [el("thead", {}, [header]), el("tbody", {}, body)]);
}

export function renderInlineError(message: string, line: number | null, column: number | null): HTMLElement {
  const location = line !== null ? ` (line ${line}${column !== null ? `, column ${column}` : ""})` : "";
  return el("p", { class: "error", "data-testid": "inline-error", role: "alert" }, [message + location]);
}

export interface RepositoryCallbacks {
  onSave: (path: string, value: string | null) => void;
}

export function renderRepositoryRow(element: RepositoryElement, callbacks: RepositoryCallbacks): HTMLElement {
  const cells: HTMLElement[] = [
    el("td", { class: "path" }, [element.path]),
    el("td", {}, [element.type]),
    el("td", {}, [element.category]),
  ];
  const valueCell = el("td", {});
  if (element.virtual) {
    valueCell.append(el("em", { title: "implicit browser data; cannot hold a stored value" }, ["(virtual)"]));
  } else {
    const input = el("input", { value: element.value ?? "", "data-testid": `value-${element.path}` });
    const save = el("button", {}, ["Save"]);
    save.onclick = () => callbacks.onSave(element.path, input.value === "" ? null : input.value);
    valueCell.append(input, save);
  }
  cells.push(valueCell);
  return el("tr", { "data-path": element.path }, cells);
}

export function renderForm(form: AnnotatedForm): HTMLElement {
  const rows = form.fields.map((field) =>
    el("tr", { "data-path": field.path }, [
      el("td", {}, [field.path]),
      el("td", {}, [el("input", { value: field.value ?? "" })]),
      el("td", { class: "annotation" }, [
        `purposes: ${field.purposes.join(", ")}; recipients: ${field.recipients.join(", ")}; retention: ${field.retention}`,
      ]),
      el("td", { class: field["necessity-flag"] ? "optional" : "needed" }, [
        field["necessity-flag"] ? "beyond core service" : "needed for service",
      ]),
    ]),
  );
  return el("table", { class: "form", "data-testid": "annotated-form" }, [
    el("thead", {}, [
      el("tr", {}, [
        el("th", {}, ["Field"]),
        el("th", {}, ["Value"]),
        el("th", {}, ["Stated practices"]),
        el("th", {}, ["Necessity"]),
      ]),
    ]),
    el("tbody", {}, rows),
  ]);
}

export function renderCoverageFailure(result: FormCheckResult): HTMLElement {
  return el("div", { class: "uncovered", "data-testid": "uncovered" }, [
    el("p", { class: "error" }, [
      "Request refused: the site's policy does not cover these elements:",
    ]),
    el("ul", {}, result.coverage.uncovered.map((leaf) => el("li", {}, [leaf]))),
  ]);
}
