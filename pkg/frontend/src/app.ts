import { ApiClient, ApiError } from "./api.js";
import { candidateCarousel } from "./carousel.js";
import { defineDialog, type CommittedStep, type DefineView } from "./define.js";
import {
  buildScene,
  countVoxels,
  renderPreview,
  renderWorld,
  type SceneHandles,
} from "./scene.js";
import type { Candidate, Metrics, SubmitResponse, World } from "./types.js";

interface DefineFrame {
  head: string;
  steps: CommittedStep[];
}

/** Everything the DOM is rendered from. Populated only from server
    responses; the world itself is re-fetched after every mutation. */
export interface ViewModel {
  world: World;
  interactions: number;
  candidates: Candidate[];
  lastUtterance: string | null;
  defineStack: DefineFrame[];
  definePending: { utterance: string; candidates: Candidate[] } | null;
  status: string;
  note: string | null;
  error: string | null;
  metrics: Metrics | null;
}

export interface AppOptions {
  user: string;
}

export class App {
  readonly handles: SceneHandles;
  readonly vm: ViewModel = {
    world: { voxels: [], selection: [] },
    interactions: 0,
    candidates: [],
    lastUtterance: null,
    defineStack: [],
    definePending: null,
    status: "",
    note: null,
    error: null,
    metrics: null,
  };

  private actions: Promise<void> = Promise.resolve();
  private readonly regions: {
    worldMeta: HTMLElement;
    status: HTMLElement;
    error: HTMLElement;
    candidates: HTMLElement;
    define: HTMLElement;
    metrics: HTMLElement;
    input: HTMLInputElement;
  };

  constructor(
    readonly root: HTMLElement,
    readonly api: ApiClient,
    readonly user: string,
  ) {
    this.handles = buildScene();
    root.innerHTML = `
      <div class="app">
        <header class="app-header">
          <h1>voxlang</h1>
          <span id="world-meta"></span>
        </header>
        <div id="viewport"></div>
        <form id="command-form">
          <input id="command-input" autocomplete="off"
                 placeholder="say something, e.g. add red top" />
          <button type="submit">go</button>
        </form>
        <div id="status-line"></div>
        <div id="error-line"></div>
        <div id="candidates"></div>
        <div id="define"></div>
        <aside id="metrics"></aside>
      </div>`;
    const pick = <T extends HTMLElement>(selector: string): T => {
      const el = root.querySelector<T>(selector);
      if (!el) throw new Error(`missing region ${selector}`);
      return el;
    };
    this.regions = {
      worldMeta: pick("#world-meta"),
      status: pick("#status-line"),
      error: pick("#error-line"),
      candidates: pick("#candidates"),
      define: pick("#define"),
      metrics: pick("#metrics"),
      input: pick<HTMLInputElement>("#command-input"),
    };
    const form = pick<HTMLFormElement>("#command-form");
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const text = this.regions.input.value.trim();
      if (text) {
        this.regions.input.value = "";
        this.submitUtterance(text);
      }
    });
  }

  inDefine(): boolean {
    return this.vm.defineStack.length > 0;
  }

  voxelCount(): number {
    return countVoxels(this.handles.scene);
  }

  // every mutating interaction funnels through one chain, so the UI never
  // has two writes racing each other
  private enqueue(fn: () => Promise<void>): Promise<void> {
    const next = this.actions.then(fn).then(
      () => {
        this.vm.error = null;
        this.render();
      },
      (err: unknown) => {
        this.vm.error = err instanceof Error ? err.message : String(err);
        this.render();
      },
    );
    this.actions = next;
    return next;
  }

  /** Resolves when every queued interaction has settled. */
  async idle(): Promise<void> {
    let tail;
    do {
      tail = this.actions;
      await tail;
    } while (tail !== this.actions);
  }

  async init(): Promise<void> {
    await this.enqueue(async () => {
      await this.refresh();
      await this.refreshMetrics();
    });
  }

  /** Re-derive the committed truth from the server and redraw. */
  private async refresh(): Promise<void> {
    const state = await this.api.state();
    this.vm.world = state.world;
    this.vm.interactions = state.interactions;
    const depth = state.define_depths[this.user] ?? 0;
    while (this.vm.defineStack.length < depth) {
      this.vm.defineStack.push({ head: "(definition in progress)", steps: [] });
    }
    if (this.vm.defineStack.length > depth) {
      this.vm.defineStack.length = depth;
    }
    if (depth === 0) {
      this.vm.definePending = null;
    }
    renderWorld(this.vm.world, this.handles);
  }

  private async refreshMetrics(): Promise<void> {
    this.vm.metrics = await this.api.metrics();
  }

  private consumeSubmit(res: SubmitResponse, utterance: string): void {
    if (res.status === "unparsable") {
      // the server opened (or deepened) a definition for this head
      this.vm.candidates = [];
      this.vm.definePending = null;
      while (this.vm.defineStack.length < res.define_depth) {
        this.vm.defineStack.push({ head: res.utterance, steps: [] });
      }
      this.vm.note = `"${res.utterance}" has no reading yet; show the steps below`;
      this.vm.status = "";
    } else if (this.inDefine()) {
      this.vm.definePending = { utterance, candidates: res.candidates };
      this.vm.note = null;
    } else {
      this.vm.candidates = res.candidates;
      this.vm.status = `${res.candidates.length} reading(s) for "${utterance}"`;
    }
  }

  submitUtterance(utterance: string): Promise<void> {
    return this.enqueue(async () => {
      this.vm.lastUtterance = utterance;
      const res = this.inDefine()
        ? await this.api.defineStep(this.user, utterance)
        : await this.api.submit(this.user, utterance);
      this.consumeSubmit(res, utterance);
      await this.refresh();
    });
  }

  acceptCandidate(index: number): Promise<void> {
    return this.enqueue(async () => {
      try {
        const res = await this.api.accept(this.user, index);
        if (this.inDefine()) {
          const frame = this.vm.defineStack.at(-1);
          frame?.steps.push({
            utterance: this.vm.definePending?.utterance ?? "",
            program: res.program,
          });
          this.vm.definePending = null;
        } else {
          this.vm.candidates = [];
          this.vm.status = `accepted: ${res.program}`;
          await this.refreshMetrics();
        }
      } catch (err) {
        if (err instanceof ApiError && err.code === "stale_candidate"
            && this.vm.lastUtterance) {
          // the world moved under us; fetch fresh readings for the utterance
          const res = this.inDefine()
            ? await this.api.defineStep(this.user, this.vm.lastUtterance)
            : await this.api.submit(this.user, this.vm.lastUtterance);
          this.consumeSubmit(res, this.vm.lastUtterance);
        } else {
          throw err;
        }
      }
      await this.refresh();
    });
  }

  rejectCandidates(): Promise<void> {
    return this.enqueue(async () => {
      const res = await this.api.reject(this.user);
      this.consumeSubmit(res, res.utterance);
      await this.refresh();
    });
  }

  acceptDefinition(): Promise<void> {
    return this.enqueue(async () => {
      const res = await this.api.defineAccept(this.user);
      this.vm.defineStack.pop();
      this.vm.definePending = null;
      if (res.define_depth === 0) {
        this.vm.status = res.redundant
          ? `"${res.head}" already meant that; nothing new to learn`
          : `learned ${res.rules.length} rule(s) for "${res.head}"`;
      } else {
        // the head just became one more committed step of the outer definition
        const parent = this.vm.defineStack.at(-1);
        parent?.steps.push({ utterance: res.head, program: `(defined) ${res.head}` });
        this.vm.status = `defined "${res.head}"`;
      }
      this.vm.note = null;
      await this.refresh();
      await this.refreshMetrics();
    });
  }

  cancelDefine(): Promise<void> {
    return this.enqueue(async () => {
      const depth = await this.api.defineCancel(this.user);
      this.vm.defineStack.length = depth;
      this.vm.definePending = null;
      this.vm.note = null;
      this.vm.status = depth > 0 ? "back to the outer definition" : "definition dropped";
      await this.refresh();
    });
  }

  /** Hover preview: ghost-render a candidate's outcome, or restore the
      committed world on null. Pure presentation; no server calls. */
  previewCandidate(candidate: Candidate | null): void {
    if (candidate) {
      renderPreview(this.vm.world, candidate.diff, this.handles);
    } else {
      renderWorld(this.vm.world, this.handles);
    }
  }

  render(): void {
    const { vm, regions } = this;
    regions.worldMeta.textContent =
      `${vm.world.voxels.length} voxel(s), ${vm.world.selection.length} selected,`
      + ` ${vm.interactions} interactions`;
    regions.status.textContent = vm.status;
    regions.error.textContent = vm.error ?? "";

    if (!this.inDefine() && vm.candidates.length > 0) {
      candidateCarousel(regions.candidates, vm.candidates, {
        onAccept: (index) => void this.acceptCandidate(index),
        onReject: () => void this.rejectCandidates(),
        onPreview: (candidate) => this.previewCandidate(candidate),
      });
    } else {
      regions.candidates.replaceChildren();
    }

    if (this.inDefine()) {
      const view: DefineView = {
        breadcrumb: vm.defineStack.map((frame) => frame.head),
        steps: vm.defineStack.at(-1)?.steps ?? [],
        pending: vm.definePending,
        error: null,
        note: vm.note,
      };
      defineDialog(regions.define, view, {
        onStep: (utterance) => void this.submitUtterance(utterance),
        onPick: (index) => void this.acceptCandidate(index),
        onPickReject: () => void this.rejectCandidates(),
        onAcceptDefinition: () => void this.acceptDefinition(),
        onCancel: () => void this.cancelDefine(),
      });
    } else {
      regions.define.replaceChildren();
    }

    this.renderMetrics();
  }

  private renderMetrics(): void {
    const m = this.vm.metrics;
    const el = this.regions.metrics;
    if (!m) {
      el.replaceChildren();
      return;
    }
    const lines = [
      `accepted ${m.accepted_total} (defined-rule share ${m.accepted_induced_fraction.toFixed(2)})`,
      `rules: ${m.rule_counts.core} core + ${m.rule_counts.induced} defined`,
    ];
    for (const c of m.citations.slice(0, 3)) {
      lines.push(`${c.author}: ${c.citations} citation(s)`);
    }
    el.replaceChildren(
      ...lines.map((text) => {
        const div = el.ownerDocument.createElement("div");
        div.className = "metric-line";
        div.textContent = text;
        return div;
      }),
    );
  }
}

export function createApp(root: HTMLElement, api: ApiClient, opts: AppOptions): App {
  return new App(root, api, opts.user);
}
