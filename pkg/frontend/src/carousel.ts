import { diffSummary, type Candidate } from "./types.js";

export interface CarouselCallbacks {
  /** Candidate card clicked; `index` is the server's 1-based candidate index. */
  onAccept: (index: number) => void;
  /** "none of these" clicked. */
  onReject: () => void;
  /** Pointer entered (candidate) or left (null) a card. */
  onPreview?: (candidate: Candidate | null) => void;
}

export interface CarouselHandle {
  element: HTMLElement;
  cards: HTMLButtonElement[];
  rejectButton: HTMLButtonElement;
  destroy: () => void;
}

/** Ranked readings of an utterance. Each card shows the program, its score
    and a diff summary; clicking accepts that reading, the trailing button
    rejects the lot (which opens a definition server-side). */
export function candidateCarousel(
  container: HTMLElement,
  candidates: Candidate[],
  callbacks: CarouselCallbacks,
): CarouselHandle {
  const doc = container.ownerDocument;
  const root = doc.createElement("div");
  root.className = "carousel";

  const cards: HTMLButtonElement[] = [];
  for (const candidate of candidates) {
    const card = doc.createElement("button");
    card.type = "button";
    card.className = "candidate-card";
    card.dataset.index = String(candidate.index);
    card.dataset.summary = diffSummary(candidate.diff);

    const program = doc.createElement("code");
    program.className = "candidate-program";
    program.textContent = candidate.program;

    const meta = doc.createElement("span");
    meta.className = "candidate-meta";
    meta.textContent =
      `${diffSummary(candidate.diff)} | score ${candidate.score.toFixed(3)}` +
      ` | ${candidate.core_only ? "core" : "uses defined rules"}`;

    card.append(program, meta);
    card.addEventListener("click", () => callbacks.onAccept(candidate.index));
    card.addEventListener("mouseenter", () => callbacks.onPreview?.(candidate));
    card.addEventListener("mouseleave", () => callbacks.onPreview?.(null));
    cards.push(card);
    root.append(card);
  }

  const rejectButton = doc.createElement("button");
  rejectButton.type = "button";
  rejectButton.className = "reject-button";
  rejectButton.textContent = "none of these";
  rejectButton.addEventListener("click", () => callbacks.onReject());
  root.append(rejectButton);

  container.replaceChildren(root);
  return { element: root, cards, rejectButton, destroy: () => root.remove() };
}
