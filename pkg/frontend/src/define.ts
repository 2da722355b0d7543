import { candidateCarousel, type CarouselHandle } from "./carousel.js";
import type { Candidate } from "./types.js";

export interface CommittedStep {
  utterance: string;
  program: string;
}

/** Everything the dialog shows. The body steps are the client's log of
    interpretations the server confirmed; the server remains the source of
    truth for the definition itself. */
export interface DefineView {
  /** Heads of the open definitions, outermost first; last one is active. */
  breadcrumb: string[];
  /** Steps already committed in the active definition. */
  steps: CommittedStep[];
  /** A step whose reading must be picked before anything else can happen. */
  pending?: { utterance: string; candidates: Candidate[] } | null;
  /** Server guard message, e.g. rejecting an empty definition. */
  error?: string | null;
  note?: string | null;
}

export interface DefineCallbacks {
  onStep: (utterance: string) => void;
  /** Reading picked for the pending step (server's 1-based index). */
  onPick: (index: number) => void;
  /** None of the pending step's readings fit; defines that step instead. */
  onPickReject: () => void;
  onAcceptDefinition: () => void;
  onCancel: () => void;
}

export interface DefineHandle {
  element: HTMLElement;
  input: HTMLInputElement;
  stepButton: HTMLButtonElement;
  acceptButton: HTMLButtonElement;
  cancelButton: HTMLButtonElement;
  pickCarousel: CarouselHandle | null;
  destroy: () => void;
}

/** Definition dialog: breadcrumb for nesting, the head being defined, the
    committed body so far, a modal pick when a step is ambiguous, and the
    accept/cancel controls. */
export function defineDialog(
  container: HTMLElement,
  view: DefineView,
  callbacks: DefineCallbacks,
): DefineHandle {
  const doc = container.ownerDocument;
  const root = doc.createElement("div");
  root.className = "define-dialog";

  const breadcrumb = doc.createElement("nav");
  breadcrumb.className = "define-breadcrumb";
  view.breadcrumb.forEach((head, i) => {
    if (i > 0) {
      const sep = doc.createElement("span");
      sep.className = "crumb-sep";
      sep.textContent = " > ";
      breadcrumb.append(sep);
    }
    const crumb = doc.createElement("span");
    crumb.className = "crumb";
    crumb.textContent = `define "${head}"`;
    breadcrumb.append(crumb);
  });
  root.append(breadcrumb);

  const head = view.breadcrumb[view.breadcrumb.length - 1] ?? "";
  const title = doc.createElement("h3");
  title.className = "define-head";
  title.textContent = `define "${head}" as:`;
  root.append(title);

  if (view.note) {
    const note = doc.createElement("p");
    note.className = "define-note";
    note.textContent = view.note;
    root.append(note);
  }

  const steps = doc.createElement("ol");
  steps.className = "define-steps";
  for (const step of view.steps) {
    const item = doc.createElement("li");
    item.className = "define-step";
    const utterance = doc.createElement("code");
    utterance.className = "step-utterance";
    utterance.textContent = step.utterance;
    const program = doc.createElement("code");
    program.className = "step-program";
    program.textContent = step.program;
    item.append(utterance, program);
    steps.append(item);
  }
  root.append(steps);

  let pickCarousel: CarouselHandle | null = null;
  const pending = view.pending ?? null;
  if (pending) {
    const modal = doc.createElement("div");
    modal.className = "define-modal";
    const prompt = doc.createElement("p");
    prompt.className = "define-modal-prompt";
    prompt.textContent = `pick a reading for "${pending.utterance}"`;
    modal.append(prompt);
    const body = doc.createElement("div");
    modal.append(body);
    pickCarousel = candidateCarousel(body, pending.candidates, {
      onAccept: callbacks.onPick,
      onReject: callbacks.onPickReject,
    });
    root.append(modal);
  }

  const row = doc.createElement("form");
  row.className = "define-step-row";
  const input = doc.createElement("input");
  input.className = "define-input";
  input.placeholder = "next step, in words the system already knows";
  input.disabled = pending !== null;
  const stepButton = doc.createElement("button");
  stepButton.type = "submit";
  stepButton.className = "define-step-button";
  stepButton.textContent = "add step";
  stepButton.disabled = pending !== null;
  row.append(input, stepButton);
  row.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (text) {
      input.value = "";
      callbacks.onStep(text);
    }
  });
  root.append(row);

  const controls = doc.createElement("div");
  controls.className = "define-controls";
  const acceptButton = doc.createElement("button");
  acceptButton.type = "button";
  acceptButton.className = "accept-definition-button";
  acceptButton.textContent = "accept definition";
  acceptButton.disabled = view.steps.length === 0 || pending !== null;
  acceptButton.addEventListener("click", () => callbacks.onAcceptDefinition());
  const cancelButton = doc.createElement("button");
  cancelButton.type = "button";
  cancelButton.className = "cancel-define-button";
  cancelButton.textContent = "cancel";
  cancelButton.addEventListener("click", () => callbacks.onCancel());
  controls.append(acceptButton, cancelButton);
  root.append(controls);

  if (view.error) {
    const error = doc.createElement("p");
    error.className = "define-error";
    error.textContent = view.error;
    root.append(error);
  }

  container.replaceChildren(root);
  return {
    element: root,
    input,
    stepButton,
    acceptButton,
    cancelButton,
    pickCarousel,
    destroy: () => root.remove(),
  };
}
