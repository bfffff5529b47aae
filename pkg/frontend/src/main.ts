import { ApiClient, ApiError } from "./api";
import { connectEvents } from "./sse";
import {
  applyEvent,
  initialState,
  resyncPrompts,
  resyncSites,
  setConnected,
  type DashboardState,
} from "./state";
import {
  el,
  renderBanner,
  renderCoverageFailure,
  renderForm,
  renderInlineError,
  renderPromptCard,
  renderRepositoryRow,
  renderSitesTable,
} from "./ui";
import { validateValue } from "./validate";

const api = new ApiClient("");
let state: DashboardState = initialState();

const VIEWS = ["prompts", "sites", "preferences", "data"] as const;
type View = (typeof VIEWS)[number];
let activeView: View = "prompts";

function update(next: DashboardState): void {
  state = next;
  renderLive();
}

// -- live region (banner, prompts, sites, notices) ----------------------

function renderLive(): void {
  const banner = document.getElementById("banner-slot")!;
  banner.replaceChildren(renderBanner(state.connected));

  const promptsRoot = document.getElementById("view-prompts")!;
  const now = new Date();
  if (state.prompts.length === 0) {
    promptsRoot.replaceChildren(el("p", { class: "empty" }, ["No pending prompts."]));
  } else {
    promptsRoot.replaceChildren(
      ...state.prompts.map((p) =>
        renderPromptCard(p, now, {
          onResolve: (id, resolution, remember) => {
            // No optimistic removal: the card leaves only on the
            // prompt-resolved event after the server confirms.
            api.resolvePrompt(id, resolution, remember).catch((err: unknown) => {
              if (err instanceof ApiError && err.status === 409) {
                showToast(`Prompt for ${p.origin} was already resolved elsewhere.`);
              } else {
                showToast(`Could not resolve prompt: ${(err as Error).message}`);
              }
            });
          },
        }),
      ),
    );
  }

  const sitesRoot = document.getElementById("view-sites")!;
  const table = renderSitesTable(state.sites, { onShowPolicy: showPolicy });
  const notices = el(
    "ul",
    { class: "notices" },
    state.notices.map((n) => el("li", {}, [`${n.origin}: ${n.explanation}`])),
  );
  sitesRoot.replaceChildren(
    table,
    el("h3", {}, ["Notices"]),
    state.notices.length ? notices : el("p", { class: "empty" }, ["No notices yet."]),
    el("div", { id: "policy-detail" }),
  );

  const count = document.getElementById("prompt-count")!;
  count.textContent = state.prompts.length ? String(state.prompts.length) : "";
}

function showToast(message: string): void {
  const slot = document.getElementById("toast-slot")!;
  const toast = el("p", { class: "toast", role: "status" }, [message]);
  slot.replaceChildren(toast);
  setTimeout(() => toast.remove(), 6000);
}

async function showPolicy(origin: string): Promise<void> {
  const detail = document.getElementById("policy-detail");
  if (!detail) return;
  try {
    const policy = await api.getSitePolicy(origin);
    detail.replaceChildren(
      el("h3", {}, [`Policy of ${origin}`]),
      el("div", { class: "policy-pair" }, [
        el("pre", { class: "rendered" }, [policy.rendered]),
        el("pre", { class: "raw" }, [policy.raw]),
      ]),
    );
  } catch (err) {
    detail.replaceChildren(renderInlineError((err as Error).message, null, null));
  }
}

// -- preferences view ----------------------------------------------------

async function initPreferences(): Promise<void> {
  const root = document.getElementById("view-preferences")!;
  const [current, presets] = await Promise.all([api.getRuleset(), api.getPresets()]);

  const name = el("p", { class: "active-ruleset" }, [`Active ruleset: ${current.name}`]);
  const editor = el("textarea", { rows: "18", "data-testid": "apr-editor" });
  editor.value = current.text;
  const errorSlot = el("div", { class: "error-slot" });

  const save = el("button", { "data-testid": "save-ruleset" }, ["Save"]);
  save.onclick = async () => {
    errorSlot.replaceChildren();
    try {
      const saved = await api.putRuleset(editor.value);
      name.textContent = `Active ruleset: ${saved.name}`;
      showToast(`Ruleset "${saved.name}" saved.`);
    } catch (err) {
      // Rejected rulesets are never applied; show the server's location.
      if (err instanceof ApiError) {
        errorSlot.replaceChildren(renderInlineError(err.message, err.line, err.column));
      } else {
        errorSlot.replaceChildren(renderInlineError((err as Error).message, null, null));
      }
    }
  };

  const presetBar = el("div", { class: "presets" });
  for (const preset of presets) {
    const button = el("button", { "data-preset": preset.name }, [`Load ${preset.name}`]);
    button.onclick = () => {
      editor.value = preset.text;
      errorSlot.replaceChildren();
    };
    presetBar.append(button);
  }

  root.replaceChildren(name, presetBar, editor, el("div", {}, [save]), errorSlot);
}

// -- data & forms view ---------------------------------------------------

async function initData(): Promise<void> {
  const root = document.getElementById("view-data")!;
  const elements = await api.getRepository();

  const tbody = el(
    "tbody",
    {},
    elements.map((element) =>
      renderRepositoryRow(element, {
        onSave: async (path, value) => {
          if (value !== null) {
            const clientError = validateValue(element.type, value);
            if (clientError) {
              showToast(`${path}: ${clientError}`);
              return;
            }
          }
          try {
            await api.putRepositoryValue(path, value);
            showToast(`${path} saved.`);
          } catch (err) {
            showToast(`${path}: ${(err as Error).message}`);
          }
        },
      }),
    ),
  );
  const repoTable = el("table", { class: "repository" }, [
    el("thead", {}, [
      el("tr", {}, [
        el("th", {}, ["Element"]),
        el("th", {}, ["Type"]),
        el("th", {}, ["Category"]),
        el("th", {}, ["Value"]),
      ]),
    ]),
    tbody,
  ]);

  const originInput = el("input", { placeholder: "http://example.com", "data-testid": "form-origin" });
  const requestInput = el("textarea", { rows: "6", placeholder: "data-request { ... }" });
  const resultSlot = el("div", { class: "form-result" });
  const check = el("button", { "data-testid": "check-form" }, ["Check & fill"]);
  check.onclick = async () => {
    resultSlot.replaceChildren();
    try {
      const result = await api.checkForm(originInput.value, requestInput.value);
      if (result.covered && result.form) {
        resultSlot.replaceChildren(renderForm(result.form));
      } else {
        resultSlot.replaceChildren(renderCoverageFailure(result));
      }
    } catch (err) {
      if (err instanceof ApiError) {
        resultSlot.replaceChildren(renderInlineError(err.message, err.line, err.column));
      } else {
        resultSlot.replaceChildren(renderInlineError((err as Error).message, null, null));
      }
    }
  };

  root.replaceChildren(
    el("h3", {}, ["Your data"]),
    repoTable,
    el("h3", {}, ["Form review"]),
    el("div", { class: "form-check" }, [originInput, requestInput, check]),
    resultSlot,
  );
}

// -- navigation + boot ---------------------------------------------------

function switchView(view: View): void {
  activeView = view;
  for (const v of VIEWS) {
    document.getElementById(`view-${v}`)!.classList.toggle("hidden", v !== view);
    document.querySelector(`nav button[data-view="${v}"]`)!.classList.toggle("active", v === view);
  }
  if (view === "preferences") void initPreferences();
  if (view === "data") void initData();
}

async function resync(): Promise<void> {
  const [prompts, sites] = await Promise.all([api.getPrompts(), api.getStatus()]);
  update(resyncSites(resyncPrompts(state, prompts), sites));
}

export function boot(): void {
  for (const view of VIEWS) {
    const button = document.querySelector<HTMLButtonElement>(`nav button[data-view="${view}"]`);
    if (button) button.onclick = () => switchView(view);
  }
  connectEvents(api.eventsUrl(), {
    onEvent: (kind, data) => update(applyEvent(state, kind, data)),
    onConnected: () => {
      update(setConnected(state, true));
      void resync();
    },
    onDisconnected: () => update(setConnected(state, false)),
  });
  switchView(activeView);
  renderLive();
}

if (typeof document !== "undefined" && document.getElementById("banner-slot")) {
  boot();
}
