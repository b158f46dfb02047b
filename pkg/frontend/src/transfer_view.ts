// The main rewriting view: source editor, exemplar picker, strength
// slider, candidate list with per-metric bars, and history replay.
//
// Requests are single-flight: while one transfer is in the air, submits
// are coalesced into at most one queued follow-up.

import { ApiClient, ApiError, Candidate, TransferResponse } from "./api.js";
import { HistoryEntry, SessionState } from "./state.js";

const SCORE_FIELDS = ["away", "towards", "sim"] as const;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class TransferView {
  readonly root: HTMLElement;
  readonly editor: HTMLTextAreaElement;
  readonly exemplarSelect: HTMLSelectElement;
  readonly pastedExemplars: HTMLTextAreaElement;
  readonly lamSlider: HTMLInputElement;
  readonly lamReadout: HTMLElement;
  readonly rerankSelect: HTMLSelectElement;
  readonly submitButton: HTMLButtonElement;
  readonly regenerateButton: HTMLButtonElement;
  readonly banner: HTMLElement;
  readonly candidateList: HTMLElement;
  readonly historyList: HTMLElement;

  requestCount = 0;
  private inFlight = false;
  private queued = false;

  constructor(
    readonly api: ApiClient,
    readonly state: SessionState,
    mount: HTMLElement,
  ) {
    this.root = el("div", "transfer-view");

    const editorBlock = el("section", "editor-block");
    editorBlock.append(el("h2", undefined, "Draft"));
    this.editor = el("textarea", "source-editor");
    this.editor.rows = 4;
    this.editor.addEventListener("input", () => {
      this.state.sourceText = this.editor.value;
    });
    editorBlock.append(this.editor);

    const controls = el("section", "controls");
    this.exemplarSelect = el("select", "exemplar-picker");
    this.exemplarSelect.addEventListener("change", () => {
      this.state.exemplarSetId =
        this.exemplarSelect.value === "" ? null : this.exemplarSelect.value;
    });
    this.pastedExemplars = el("textarea", "pasted-exemplars");
    this.pastedExemplars.placeholder = "…or paste exemplars, one per line";
    this.pastedExemplars.addEventListener("input", () => {
      this.state.pastedExemplars = this.pastedExemplars.value
        .split("\n")
        .map((line) => line.trim())
        .filter((line) => line.length > 0);
    });

    this.lamSlider = el("input", "lam-slider");
    this.lamSlider.type = "range";
    this.lamSlider.min = "0";
    this.lamSlider.max = "1";
    this.lamSlider.step = "0.05";
    this.lamSlider.value = String(this.state.lam);
    this.lamReadout = el("span", "lam-readout", `λ = ${this.state.lam.toFixed(2)}`);
    this.lamSlider.addEventListener("change", () => {
      this.state.lam = Number(this.lamSlider.value);
      this.lamReadout.textContent = `λ = ${this.state.lam.toFixed(2)}`;
      void this.submit(); // a strength change re-runs the transfer once
    });
    this.lamSlider.addEventListener("input", () => {
      this.lamReadout.textContent =
        `λ = ${Number(this.lamSlider.value).toFixed(2)}`;
    });

    this.rerankSelect = el("select", "rerank-picker");
    for (const k of [1, 3, 5, 8]) {
      const opt = el("option", undefined, `rerank ${k}`);
      opt.value = String(k);
      this.rerankSelect.append(opt);
    }
    this.rerankSelect.addEventListener("change", () => {
      this.state.rerankK = Number(this.rerankSelect.value);
    });

    this.submitButton = el("button", "submit", "Restyle");
    this.submitButton.addEventListener("click", () => void this.submit());
    this.regenerateButton = el("button", "regenerate", "Regenerate");
    this.regenerateButton.addEventListener("click", () => {
      this.state.bumpSeed();
      void this.submit();
    });

    controls.append(this.exemplarSelect, this.pastedExemplars, this.lamSlider,
                    this.lamReadout, this.rerankSelect, this.submitButton,
                    this.regenerateButton);

    this.banner = el("div", "banner");
    this.banner.hidden = true;
    this.candidateList = el("ol", "candidates");
    const historyBlock = el("section", "history-block");
    historyBlock.append(el("h2", undefined, "History"));
    this.historyList = el("ul", "history");
    historyBlock.append(this.historyList);

    this.root.append(editorBlock, controls, this.banner,
                     el("h2", undefined, "Candidates"), this.candidateList,
                     historyBlock);
    mount.append(this.root);
  }

  async populateExemplarSets(): Promise<void> {
    const sets = await this.api.exemplarSets();
    this.exemplarSelect.replaceChildren();
    const none = el("option", undefined, "(pasted exemplars)");
    none.value = "";
    this.exemplarSelect.append(none);
    for (const info of sets) {
      const opt = el(
        "option",
        undefined,
        `${info.id} (${info.size}) — ${info.preview[0] ?? ""}`,
      );
      opt.value = info.id;
      this.exemplarSelect.append(opt);
    }
  }

  /** Submit the current draft. Returns the entry, or null if coalesced. */
  async submit(): Promise<HistoryEntry | null> {
    if (this.inFlight) {
      this.queued = true;
      return null;
    }
    this.inFlight = true;
    try {
      const request = this.state.buildRequest();
      this.requestCount += 1;
      const response = await this.api.transfer(request);
      const entry = this.state.record(request, response);
      this.clearBanner();
      this.renderCandidates(response);
      this.renderHistory();
      return entry;
    } catch (err) {
      this.showError(err);
      return null;
    } finally {
      this.inFlight = false;
      if (this.queued) {
        this.queued = false;
        void this.submit();
      }
    }
  }

  renderCandidates(response: TransferResponse): void {
    this.candidateList.replaceChildren();
    for (const candidate of response.candidates) {
      this.candidateList.append(this.candidateRow(candidate));
    }
  }

  private candidateRow(candidate: Candidate): HTMLElement {
    const row = el("li", "candidate");
    if (candidate.rank === 1) row.classList.add("winner");
    row.dataset.rank = String(candidate.rank);

    const textNode = el("div", "candidate-text", candidate.text);
    textNode.addEventListener("click", () => {
      this.state.promoteDraft(candidate.text);
      this.editor.value = candidate.text;
    });
    row.append(textNode);

    const bars = el("div", "score-bars");
    for (const field of SCORE_FIELDS) {
      const value = candidate.scores[field];
      const bar = el("div", `bar bar-${field}`);
      const fill = el("span", "fill");
      // raw [0,1] service value; no client-side rescaling
      fill.style.width = `${value * 100}%`;
      bar.append(fill);
      const label = el("span", "score-label", `${field} ${value}`);
      label.dataset.field = field;
      label.dataset.value = String(value);
      bars.append(bar, label);
    }
    row.append(bars);
    return row;
  }

  renderHistory(): void {
    this.historyList.replaceChildren();
    this.state.history.forEach((entry, index) => {
      const item = el("li", "history-entry");
      item.dataset.index = String(index);
      const summary = el(
        "span",
        "history-summary",
        `#${index + 1} seed=${entry.request.seed} λ=${entry.request.lam} → ` +
          entry.response.output_text,
      );
      const replay = el("button", "replay", "Replay");
      replay.addEventListener("click", () => void this.replay(index));
      item.append(summary, replay);
      this.historyList.append(item);
    });
  }

  /** Re-issue a past request verbatim; the stateless API reproduces it. */
  async replay(index: number): Promise<TransferResponse | null> {
    const entry = this.state.history[index];
    if (!entry) return null;
    try {
      const response = await this.api.transfer(entry.request);
      this.renderCandidates(response);
      this.clearBanner();
      return response;
    } catch (err) {
      this.showError(err);
      return null;
    }
  }

  private showError(err: unknown): void {
    this.banner.hidden = false;
    this.root.querySelectorAll(".field-error").forEach((node) =>
      node.classList.remove("field-error"));
    if (err instanceof ApiError && err.status === 0) {
      this.banner.textContent =
        "Service unreachable — your draft and settings are preserved.";
      return;
    }
    if (err instanceof ApiError && err.status === 422) {
      this.banner.textContent = err.fieldErrors
        .map((e) => `${e.field}: ${e.message}`)
        .join("; ");
      for (const fieldError of err.fieldErrors) {
        if (fieldError.field === "lam") this.lamSlider.classList.add("field-error");
        if (fieldError.field.startsWith("target_exemplars") ||
            fieldError.field === "exemplar_set_id") {
          this.pastedExemplars.classList.add("field-error");
          this.exemplarSelect.classList.add("field-error");
        }
      }
      return;
    }
    this.banner.textContent = err instanceof Error ? err.message : String(err);
  }

  private clearBanner(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
    this.root.querySelectorAll(".field-error").forEach((node) =>
      node.classList.remove("field-error"));
  }
}
