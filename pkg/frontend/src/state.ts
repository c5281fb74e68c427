// Client-side view state, the single event queue, and the undo history.

import { DocumentView } from "./types";

export interface ViewState {
    primaryId: string | null;
    overlayId: string | null;
    filterBelow: number;
    selectionStart: number | null;
    selectionEnd: number | null;
    t: number;
    ruleText: string;
}

export function defaultViewState(): ViewState {
    return {
        primaryId: null,
        overlayId: null,
        filterBelow: 0.1,
        selectionStart: null,
        selectionEnd: null,
        t: 0.5,
        ruleText: "",
    };
}

/** Runs async tasks strictly one after another (the app's event queue). */
export class SerialQueue {
    private tail: Promise<unknown> = Promise.resolve();

    run<T>(task: () => Promise<T>): Promise<T> {
        const next = this.tail.then(task, task);
        this.tail = next.catch(() => undefined);
        return next;
    }
}

/** Linear undo history of full document snapshots.
 *
 * The service history is append-only, so undo re-uploads the snapshot as a
 * new document rather than rewinding the old one.
 */
export class UndoHistory {
    private snapshots: DocumentView[] = [];

    push(snapshot: DocumentView): void {
        this.snapshots.push(snapshot);
    }

    pop(): DocumentView | null {
        return this.snapshots.pop() ?? null;
    }

    get depth(): number {
        return this.snapshots.length;
    }
}

export function debounce<A extends unknown[]>(
    fn: (...args: A) => void,
    delayMs: number,
): (...args: A) => void {
    let handle: ReturnType<typeof setTimeout> | null = null;
    return (...args: A) => {
        if (handle !== null) {
            clearTimeout(handle);
        }
        handle = setTimeout(() => {
            handle = null;
            fn(...args);
        }, delayMs);
    };
}
