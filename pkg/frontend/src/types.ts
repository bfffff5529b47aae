/** Mirrors of the control API's JSON objects (docs/api-reference.md). */

export type Action = "accept" | "inform" | "warn" | "block";

export interface Decision {
  action: Action;
  "fired-rule": string;
  ruleset: string;
  explanation: string;
  "policy-hash": string | null;
  "decided-at": string;
}

export interface SiteStatus {
  origin: string;
  "policy-enabled": boolean;
  "cookies-seen": boolean;
  seals: string[];
  "disclosure-uri": string | null;
  "fetch-outcome": string | null;
  "last-decision": Decision | null;
}

export interface Prompt {
  id: string;
  origin: string;
  decision: Decision;
  summary: string;
  "disclosure-uri": string | null;
  "created-at": string;
  state: "pending" | "resolved" | "timed-out";
  resolution: "allow" | "block" | null;
}

export interface RepositoryElement {
  path: string;
  type: string;
  category: string;
  virtual: boolean;
  value: string | null;
}

export interface Preset {
  name: string;
  text: string;
}

export interface RulesetInfo {
  name: string;
  text: string;
}

export interface SitePolicy {
  origin: string;
  raw: string;
  rendered: string;
  "disclosure-uri": string;
}

export interface Notice {
  origin: string;
  explanation: string;
  "fired-rule": string;
}

export interface FormField {
  path: string;
  required: boolean;
  value: string | null;
  purposes: string[];
  recipients: string[];
  retention: string;
  consequence: string | null;
  "necessity-flag": boolean;
}

export interface AnnotatedForm {
  label: string;
  site: string;
  "policy-hash": string;
  fields: FormField[];
}

export interface FormCheckResult {
  covered: boolean;
  coverage: {
    covered: Record<string, number>;
    uncovered: string[];
    ambiguous: string[];
  };
  form?: AnnotatedForm;
}
