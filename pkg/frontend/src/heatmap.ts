// Heatmap rendering: one row per phoneme that survives the filter, the
// primary document in blue and the overlay in red, hover readout of the
// exact probability. Filtering affects display only; the underlying
// documents always keep their full row set.

import { DocumentView } from "./types";

export interface HoverInfo {
    phoneme: string;
    frame: number;
    probability: number;
}

const PRIMARY_COLOR = "37, 99, 235"; // blue
const OVERLAY_COLOR = "220, 38, 38"; // red

export class HeatmapView {
    onHover: ((info: HoverInfo | null) => void) | null = null;

    constructor(private container: HTMLElement) {}

    /** Draw the active rows of `primary`, blending `overlay` when given.
     *
     * Rows shown are the union of both documents' server-computed
     * `active_rows`; the client never re-derives the filter.
     */
    render(
        primary: DocumentView | null,
        overlay: DocumentView | null,
        selection: [number, number] | null = null,
    ): void {
        this.container.replaceChildren();
        if (!primary) {
            const empty = document.createElement("p");
            empty.className = "heatmap-empty";
            empty.textContent = "No document loaded.";
            this.container.appendChild(empty);
            return;
        }
        const active = new Set<number>(primary.active_rows);
        if (overlay) {
            for (const row of overlay.active_rows) {
                active.add(row);
            }
        }
        const rows = [...active].sort((a, b) => a - b);
        for (const row of rows) {
            this.container.appendChild(this.renderRow(primary, overlay, row, selection));
        }
    }

    private renderRow(
        primary: DocumentView,
        overlay: DocumentView | null,
        row: number,
        selection: [number, number] | null,
    ): HTMLElement {
        const element = document.createElement("div");
        element.className = "heatmap-row";
        element.dataset.phoneme = primary.phonemes[row];

        const label = document.createElement("span");
        label.className = "heatmap-label";
        label.textContent = primary.phonemes[row];
        element.appendChild(label);

        const frames = primary.frames.length;
        const canvas = document.createElement("canvas");
        canvas.className = "heatmap-cells";
        canvas.width = Math.max(frames, 1);
        canvas.height = 16;
        element.appendChild(canvas);

        const context = canvas.getContext("2d");
        if (context) {
            context.clearRect(0, 0, canvas.width, canvas.height);
            for (let t = 0; t < frames; t += 1) {
                const value = primary.frames[t][row];
                if (value > 0) {
                    context.fillStyle = `rgba(${PRIMARY_COLOR}, ${value})`;
                    context.fillRect(t, 0, 1, canvas.height);
                }
                const overlayValue = overlay?.frames[t]?.[row] ?? 0;
                if (overlayValue > 0) {
                    context.fillStyle = `rgba(${OVERLAY_COLOR}, ${overlayValue * 0.6})`;
                    context.fillRect(t, 0, 1, canvas.height);
                }
            }
            if (selection) {
                const [start, end] = selection;
                context.strokeStyle = "rgba(16, 185, 129, 0.9)";
                context.strokeRect(start + 0.5, 0.5, Math.max(end - start - 1, 0), canvas.height - 1);
            }
        }

        canvas.addEventListener("mousemove", (event) => {
            const bounds = canvas.getBoundingClientRect();
            const scale = bounds.width > 0 ? canvas.width / bounds.width : 1;
            const frame = Math.floor((event.clientX - bounds.left) * scale);
            if (frame >= 0 && frame < frames && this.onHover) {
                this.onHover({
                    phoneme: primary.phonemes[row],
                    frame,
                    probability: primary.frames[frame][row],
                });
            }
        });
        canvas.addEventListener("mouseleave", () => {
            if (this.onHover) {
                this.onHover(null);
            }
        });
        return element;
    }
}

/** Sparkline of a per-frame distance curve under the heatmap. */
export class CurveView {
    constructor(private canvas: HTMLCanvasElement, private readout: HTMLElement) {}

    render(curve: number[], mean: number): void {
        const max = curve.length ? Math.max(...curve) : 0;
        this.readout.textContent = `mean ${mean.toFixed(6)} · max ${max.toFixed(6)}`;
        this.canvas.width = Math.max(curve.length, 1);
        const context = this.canvas.getContext("2d");
        if (!context) {
            return;
        }
        const height = this.canvas.height;
        context.clearRect(0, 0, this.canvas.width, height);
        context.fillStyle = "rgba(107, 33, 168, 0.8)";
        for (let t = 0; t < curve.length; t += 1) {
            const bar = Math.round(Math.min(curve[t], 1) * (height - 1));
            context.fillRect(t, height - bar, 1, bar);
        }
    }

    clear(): void {
        this.readout.textContent = "no edits yet";
        const context = this.canvas.getContext("2d");
        context?.clearRect(0, 0, this.canvas.width, this.canvas.height);
    }
}
