// The editor application: heatmap inspection, interpolation, rule edits,
// region edits, distance feedback, and a linear undo history. All state
// transitions run through one serial queue; stale-version conflicts are
// resolved by refetching the document and replaying the edit once.

import { Api, ApiError } from "./api";
import { CurveView, HeatmapView, HoverInfo } from "./heatmap";
import { debounce, defaultViewState, SerialQueue, UndoHistory, ViewState } from "./state";
import { DocumentView, EditReport, EditResponse, Operation } from "./types";

const SLIDER_DEBOUNCE_MS = 150;

export interface EditorElements {
    fileInput: HTMLInputElement;
    primarySelect: HTMLSelectElement;
    overlaySelect: HTMLSelectElement;
    filterInput: HTMLInputElement;
    undoButton: HTMLButtonElement;
    exportButton: HTMLButtonElement;
    hoverReadout: HTMLElement;
    banner: HTMLElement;
    bannerText: HTMLElement;
    bannerDismiss: HTMLButtonElement;
    heatmap: HTMLElement;
    curveCanvas: HTMLCanvasElement;
    distanceReadout: HTMLElement;
    tSlider: HTMLInputElement;
    tValue: HTMLElement;
    rangeStart: HTMLInputElement;
    rangeEnd: HTMLInputElement;
    ruleText: HTMLTextAreaElement;
    applyRules: HTMLButtonElement;
    ruleError: HTMLElement;
    reportTable: HTMLTableElement;
    regionPhoneme: HTMLSelectElement;
    regionStrength: HTMLInputElement;
    applyRegion: HTMLButtonElement;
}

export class EditorApp {
    readonly state: ViewState = defaultViewState();
    readonly elements: EditorElements;
    readonly history = new UndoHistory();

    private readonly queue = new SerialQueue();
    private readonly heatmapView: HeatmapView;
    private readonly curveView: CurveView;
    private primary: DocumentView | null = null;
    private overlay: DocumentView | null = null;

    constructor(container: HTMLElement, private api: Api) {
        container.innerHTML = EDITOR_TEMPLATE;
        this.elements = collectElements(container);
        this.heatmapView = new HeatmapView(this.elements.heatmap);
        this.curveView = new CurveView(
            this.elements.curveCanvas, this.elements.distanceReadout,
        );
        this.curveView.clear();
        this.heatmapView.onHover = (info) => this.showHover(info);
        this.wire();
    }

    /** Resolves once every queued task so far has settled. */
    whenIdle(): Promise<void> {
        return this.queue.run(async () => undefined);
    }

    private wire(): void {
        const els = this.elements;
        els.fileInput.addEventListener("change", () => {
            void this.uploadSelectedFile();
        });
        els.primarySelect.addEventListener("change", () => {
            void this.selectPrimary(els.primarySelect.value || null);
        });
        els.overlaySelect.addEventListener("change", () => {
            void this.selectOverlay(els.overlaySelect.value || null);
        });
        els.filterInput.addEventListener("change", () => {
            const value = Number(els.filterInput.value);
            if (value >= 0 && value <= 1) {
                this.state.filterBelow = value;
                void this.refreshViews();
            }
        });
        els.undoButton.addEventListener("click", () => {
            void this.undo();
        });
        els.exportButton.addEventListener("click", () => {
            void this.exportBinary();
        });

        const debouncedInterpolate = debounce(() => {
            void this.submitInterpolation();
        }, SLIDER_DEBOUNCE_MS);
        els.tSlider.addEventListener("input", () => {
            this.state.t = Number(els.tSlider.value);
            els.tValue.textContent = this.state.t.toFixed(2);
            debouncedInterpolate();
        });
        for (const input of [els.rangeStart, els.rangeEnd]) {
            input.addEventListener("change", () => {
                this.state.selectionStart = parseBound(els.rangeStart.value);
                this.state.selectionEnd = parseBound(els.rangeEnd.value);
                this.renderHeatmap();
            });
        }

        els.applyRules.addEventListener("click", () => {
            this.state.ruleText = els.ruleText.value;
            void this.submitRules();
        });
        els.applyRegion.addEventListener("click", () => {
            void this.submitRegion();
        });
        els.bannerDismiss.addEventListener("click", () => {
            els.banner.classList.add("hidden");
        });
    }

    // ----- document loading -------------------------------------------------

    async refreshDocumentList(): Promise<void> {
        const documents = await this.api.listDocuments();
        const fill = (select: HTMLSelectElement, allowNone: boolean) => {
            const current = select.value;
            select.replaceChildren();
            if (allowNone) {
                const none = document.createElement("option");
                none.value = "";
                none.textContent = "(none)";
                select.appendChild(none);
            }
            for (const info of documents) {
                const option = document.createElement("option");
                option.value = info.id;
                option.textContent = `${info.label} (v${info.version}, ${info.num_frames}f)`;
                select.appendChild(option);
            }
            select.value = current;
        };
        fill(this.elements.primarySelect, true);
        fill(this.elements.overlaySelect, true);
    }

    selectPrimary(id: string | null): Promise<void> {
        return this.queue.run(async () => {
            this.state.primaryId = id;
            this.primary = id
                ? await this.api.getDocument(id, this.state.filterBelow)
                : null;
            this.elements.primarySelect.value = id ?? "";
            this.populatePhonemeChoices();
            this.renderHeatmap();
        });
    }

    selectOverlay(id: string | null): Promise<void> {
        return this.queue.run(async () => {
            this.state.overlayId = id;
            this.overlay = id
                ? await this.api.getDocument(id, this.state.filterBelow)
                : null;
            this.elements.overlaySelect.value = id ?? "";
            this.renderHeatmap();
        });
    }

    private refreshViews(): Promise<void> {
        return this.queue.run(async () => {
            if (this.state.primaryId) {
                this.primary = await this.api.getDocument(
                    this.state.primaryId, this.state.filterBelow,
                );
            }
            if (this.state.overlayId) {
                this.overlay = await this.api.getDocument(
                    this.state.overlayId, this.state.filterBelow,
                );
            }
            this.renderHeatmap();
        });
    }

    private async uploadSelectedFile(): Promise<void> {
        const file = this.elements.fileInput.files?.[0];
        if (!file) {
            return;
        }
        try {
            const created = await this.api.uploadBinary(
                await file.arrayBuffer(), file.name,
            );
            await this.refreshDocumentList();
            await this.selectPrimary(created.id);
        } catch (error) {
            this.showBanner(describe(error));
        }
    }

    private async exportBinary(): Promise<void> {
        if (!this.state.primaryId) {
            return;
        }
        try {
            // Always the full document; row filtering is display-only.
            const data = await this.api.downloadBinary(this.state.primaryId);
            const url = URL.createObjectURL(
                new Blob([data], { type: "application/octet-stream" }),
            );
            const anchor = document.createElement("a");
            anchor.href = url;
            anchor.download = `${this.state.primaryId}.ppg`;
            anchor.click();
            URL.revokeObjectURL(url);
        } catch (error) {
            this.showBanner(describe(error));
        }
    }

    // ----- edits ------------------------------------------------------------

    /** Issue an edit; on a 409 conflict, refetch and replay it once. */
    private async performEdit(operation: Operation): Promise<EditResponse> {
        if (!this.primary) {
            throw new Error("no document selected");
        }
        const id = this.primary.id;
        try {
            return await this.api.edit(id, {
                base_version: this.primary.version,
                operation,
            });
        } catch (error) {
            if (error instanceof ApiError && error.status === 409) {
                const fresh = await this.api.getDocument(id, this.state.filterBelow);
                this.primary = fresh;
                return await this.api.edit(id, {
                    base_version: fresh.version,
                    operation,
                });
            }
            throw error;
        }
    }

    submitEdit(operation: Operation): Promise<EditResponse | null> {
        return this.queue.run(async () => {
            if (!this.primary) {
                return null;
            }
            const before = this.primary;
            const response = await this.performEdit(operation);
            this.history.push(before);
            this.primary = await this.api.getDocument(
                response.id, this.state.filterBelow,
            );
            this.renderHeatmap();
            const feedback = response.framewise_distance_to_previous;
            this.curveView.render(feedback.curve, feedback.mean);
            return response;
        });
    }

    private selection(): [number, number] | null {
        const { selectionStart, selectionEnd } = this.state;
        if (selectionStart === null || selectionEnd === null) {
            return null;
        }
        return [selectionStart, selectionEnd];
    }

    async submitInterpolation(): Promise<void> {
        if (!this.state.primaryId || !this.state.overlayId) {
            return;
        }
        const operation: Operation = {
            type: "interpolate",
            other_id: this.state.overlayId,
            t: this.state.t,
        };
        const span = this.selection();
        if (span) {
            operation.start = span[0];
            operation.end = span[1];
        }
        try {
            await this.submitEdit(operation);
        } catch (error) {
            this.showBanner(describe(error));
        }
    }

    async submitRules(): Promise<void> {
        this.elements.ruleError.classList.add("hidden");
        try {
            const response = await this.submitEdit({
                type: "rules",
                rules: this.state.ruleText,
            });
            if (response?.edit_report) {
                this.renderReport(response.edit_report);
            }
        } catch (error) {
            if (error instanceof ApiError && error.status === 422) {
                this.elements.ruleError.textContent = error.detail;
                this.elements.ruleError.classList.remove("hidden");
            } else {
                this.showBanner(describe(error));
            }
        }
    }

    async submitRegion(): Promise<void> {
        if (!this.primary) {
            return;
        }
        const span = this.selection();
        if (!span) {
            this.showBanner("select a frame range first");
            return;
        }
        const size = this.primary.phonemes.length;
        const index = this.elements.regionPhoneme.selectedIndex;
        const strength = Number(this.elements.regionStrength.value);
        const rest = size > 1 ? (1 - strength) / (size - 1) : 0;
        const target = new Array<number>(size).fill(rest);
        target[index] = strength;
        try {
            await this.submitEdit({
                type: "set_region",
                start: span[0],
                end: span[1],
                target,
            });
        } catch (error) {
            this.showBanner(describe(error));
        }
    }

    undo(): Promise<void> {
        return this.queue.run(async () => {
            const snapshot = this.history.pop();
            if (!snapshot) {
                return;
            }
            // History is append-only on the server: re-upload the snapshot
            // as a new document and switch to it.
            const created = await this.api.uploadJson({
                phonemes: snapshot.phonemes,
                hop_seconds: snapshot.hop_seconds,
                frames: snapshot.frames,
                label: `${snapshot.label}~undo`,
            });
            this.state.primaryId = created.id;
            this.primary = await this.api.getDocument(
                created.id, this.state.filterBelow,
            );
            await this.refreshDocumentList();
            this.elements.primarySelect.value = created.id;
            this.renderHeatmap();
        });
    }

    // ----- rendering ----------------------------------------------------------

    renderHeatmap(): void {
        this.heatmapView.render(this.primary, this.overlay, this.selection());
    }

    private renderReport(report: EditReport): void {
        const table = this.elements.reportTable;
        table.replaceChildren();
        const header = table.insertRow();
        for (const text of ["rule", "runs", "frames", "substitutions"]) {
            const cell = document.createElement("th");
            cell.textContent = text;
            header.appendChild(cell);
        }
        for (const match of report.matches) {
            const row = table.insertRow();
            row.insertCell().textContent = match.rule;
            row.insertCell().textContent = `${match.run_span[0]}..${match.run_span[1]}`;
            row.insertCell().textContent = `${match.frame_span[0]}..${match.frame_span[1]}`;
            row.insertCell().textContent = match.substitutions
                .map((s) => `${s.from_phoneme}->${s.to_phoneme} @ ${s.frame_start}..${s.frame_end}`)
                .join(", ");
        }
    }

    private populatePhonemeChoices(): void {
        const select = this.elements.regionPhoneme;
        select.replaceChildren();
        for (const phoneme of this.primary?.phonemes ?? []) {
            const option = document.createElement("option");
            option.value = phoneme;
            option.textContent = phoneme;
            select.appendChild(option);
        }
    }

    private showHover(info: HoverInfo | null): void {
        this.elements.hoverReadout.textContent = info
            ? `${info.phoneme} @ frame ${info.frame}: ${info.probability.toFixed(6)}`
            : "";
    }

    private showBanner(message: string): void {
        this.elements.bannerText.textContent = message;
        this.elements.banner.classList.remove("hidden");
    }
}

function parseBound(value: string): number | null {
    const parsed = Number.parseInt(value, 10);
    return Number.isNaN(parsed) ? null : parsed;
}

function describe(error: unknown): string {
    return error instanceof Error ? error.message : String(error);
}

function collectElements(container: HTMLElement): EditorElements {
    const get = <T extends HTMLElement>(selector: string): T => {
        const element = container.querySelector(selector);
        if (!element) {
            throw new Error(`missing editor element ${selector}`);
        }
        return element as T;
    };
    return {
        fileInput: get("#file-input"),
        primarySelect: get("#primary-select"),
        overlaySelect: get("#overlay-select"),
        filterInput: get("#filter-input"),
        undoButton: get("#undo-button"),
        exportButton: get("#export-button"),
        hoverReadout: get("#hover-readout"),
        banner: get("#banner"),
        bannerText: get("#banner-text"),
        bannerDismiss: get("#banner-dismiss"),
        heatmap: get("#heatmap"),
        curveCanvas: get("#curve-canvas"),
        distanceReadout: get("#distance-readout"),
        tSlider: get("#t-slider"),
        tValue: get("#t-value"),
        rangeStart: get("#range-start"),
        rangeEnd: get("#range-end"),
        ruleText: get("#rule-text"),
        applyRules: get("#apply-rules"),
        ruleError: get("#rule-error"),
        reportTable: get("#report-table"),
        regionPhoneme: get("#region-phoneme"),
        regionStrength: get("#region-strength"),
        applyRegion: get("#apply-region"),
    };
}

const EDITOR_TEMPLATE = `
<div class="editor">
  <header class="toolbar">
    <input type="file" id="file-input" accept=".ppg">
    <label>view <select id="primary-select"></select></label>
    <label>overlay <select id="overlay-select"></select></label>
    <label>filter <input id="filter-input" type="number" min="0" max="1" step="0.01" value="0.1"></label>
    <button id="undo-button">undo</button>
    <button id="export-button">export .ppg</button>
    <span id="hover-readout" class="hover-readout"></span>
  </header>
  <div id="banner" class="banner hidden">
    <span id="banner-text"></span>
    <button id="banner-dismiss">dismiss</button>
  </div>
  <section id="heatmap" class="heatmap"></section>
  <section class="distance-panel">
    <h3>distance to previous state</h3>
    <canvas id="curve-canvas" height="48"></canvas>
    <span id="distance-readout"></span>
  </section>
  <section class="panels">
    <div class="panel">
      <h3>interpolate toward overlay</h3>
      <input id="t-slider" type="range" min="0" max="1" step="0.01" value="0.5">
      <span id="t-value">0.50</span>
      <label>frames <input id="range-start" size="5" placeholder="start">:<input id="range-end" size="5" placeholder="end"></label>
    </div>
    <div class="panel">
      <h3>substitution rules</h3>
      <textarea id="rule-text" rows="4" placeholder="m aa t -> m ey t"></textarea>
      <button id="apply-rules">apply rules</button>
      <div id="rule-error" class="error hidden"></div>
      <table id="report-table"></table>
    </div>
    <div class="panel">
      <h3>set region</h3>
      <label>phoneme <select id="region-phoneme"></select></label>
      <label>strength <input id="region-strength" type="number" min="0" max="1" step="0.05" value="1"></label>
      <button id="apply-region">apply</button>
    </div>
  </section>
</div>
`;
