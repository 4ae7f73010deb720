/**
 * DOM wiring for the claim-checking page.
 *
 * The page shows exactly what the service returned: the label badge,
 * justification text, and evidence rows are rendered byte-for-byte from
 * the response, with no client-side fact logic. The claim text stays in
 * the editor after every submission so it can be reworded and resubmitted.
 */

import {
  ApiClient,
  ApiError,
  EvidenceItem,
  ExplanationLanguage,
  VerdictLabel,
} from './api.js';

interface Elements {
  form: HTMLFormElement;
  claim: HTMLTextAreaElement;
  snippets: HTMLSelectElement;
  language: HTMLSelectElement;
  submit: HTMLButtonElement;
  ablate: HTMLButtonElement;
  error: HTMLElement;
  errorMessage: HTMLElement;
  retry: HTMLButtonElement;
  result: HTMLElement;
  label: HTMLElement;
  explanation: HTMLElement;
  evidence: HTMLElement;
  ablation: HTMLElement;
  ablationStrip: HTMLElement;
}

function grab(root: Document): Elements {
  const byId = <T extends HTMLElement>(id: string): T => {
    const element = root.getElementById(id);
    if (!element) throw new Error(`missing element #${id}`);
    return element as T;
  };
  return {
    form: byId<HTMLFormElement>('claim-form'),
    claim: byId<HTMLTextAreaElement>('claim'),
    snippets: byId<HTMLSelectElement>('snippets'),
    language: byId<HTMLSelectElement>('language'),
    submit: byId<HTMLButtonElement>('submit'),
    ablate: byId<HTMLButtonElement>('ablate'),
    error: byId('error-banner'),
    errorMessage: byId('error-message'),
    retry: byId<HTMLButtonElement>('retry'),
    result: byId('result'),
    label: byId('label'),
    explanation: byId('explanation'),
    evidence: byId('evidence'),
    ablation: byId('ablation'),
    ablationStrip: byId('ablation-strip'),
  };
}

const LABEL_CLASSES: Record<VerdictLabel, string> = {
  True: 'label-true',
  False: 'label-false',
  Other: 'label-other',
};

function renderLabelBadge(element: HTMLElement, label: VerdictLabel): void {
  element.textContent = label;
  element.className = `badge ${LABEL_CLASSES[label]}`;
}

function renderEvidence(root: Document, list: HTMLElement, items: EvidenceItem[]): void {
  list.replaceChildren();
  for (const item of items) {
    const row = root.createElement('li');
    row.className = 'evidence-row';
    const link = root.createElement('a');
    link.href = item.url;
    link.target = '_blank';
    link.rel = 'noopener';
    link.textContent = item.title || item.url;
    const snippet = root.createElement('p');
    snippet.className = 'snippet';
    snippet.textContent = item.snippet;
    row.append(link, snippet);
    list.append(row);
  }
}

const DEFAULT_SNIPPET_COUNT = '3';

export function setupApp(root: Document, api: ApiClient): void {
  const el = grab(root);
  el.snippets.value = DEFAULT_SNIPPET_COUNT;
  let verifySequence = 0;
  let verifyInFlight = false;
  let lastAction: (() => void) | null = null;

  const syncSubmitState = () => {
    const empty = el.claim.value.trim().length === 0;
    el.submit.disabled = empty || verifyInFlight;
    el.ablate.disabled = empty;
  };

  const showError = (message: string) => {
    el.errorMessage.textContent = message;
    el.error.hidden = false;
  };
  const clearError = () => {
    el.error.hidden = true;
    el.errorMessage.textContent = '';
  };

  const submitClaim = () => {
    const claim = el.claim.value.trim();
    if (!claim || verifyInFlight) return;
    const language = el.language.value as ExplanationLanguage;
    const sequence = ++verifySequence;
    verifyInFlight = true;
    lastAction = submitClaim;
    clearError();
    syncSubmitState();
    api
      .verify({
        claim,
        snippet_count: Number(el.snippets.value),
        explanation_language: language,
      })
      .then((response) => {
        if (sequence !== verifySequence) return; // superseded submission
        renderLabelBadge(el.label, response.label);
        el.explanation.textContent = response.explanation;
        el.explanation.dir = language === 'ar' ? 'rtl' : 'ltr';
        renderEvidence(root, el.evidence, response.evidence);
        el.result.hidden = false;
      })
      .catch((err: unknown) => {
        if (sequence !== verifySequence) return;
        showError(err instanceof ApiError ? err.message : String(err));
      })
      .finally(() => {
        if (sequence === verifySequence) {
          verifyInFlight = false;
          syncSubmitState();
        }
      });
  };

  const runAblation = () => {
    const claim = el.claim.value.trim();
    if (!claim) return;
    lastAction = runAblation;
    clearError();
    api
      .ablate(claim)
      .then((response) => {
        el.ablationStrip.replaceChildren();
        const counts = Object.keys(response.labels_by_count)
          .map(Number)
          .sort((a, b) => a - b);
        for (const count of counts) {
          const label = response.labels_by_count[String(count)];
          const chip = root.createElement('span');
          chip.className = `chip ${LABEL_CLASSES[label]}`;
          chip.textContent = `${count}: ${label}`;
          el.ablationStrip.append(chip);
        }
        el.ablation.hidden = false;
      })
      .catch((err: unknown) => {
        showError(err instanceof ApiError ? err.message : String(err));
      });
  };

  el.form.addEventListener('submit', (event) => {
    event.preventDefault();
    submitClaim();
  });
  el.ablate.addEventListener('click', runAblation);
  el.retry.addEventListener('click', () => {
    if (lastAction) lastAction();
  });
  el.claim.addEventListener('input', syncSubmitState);

  syncSubmitState();
}
