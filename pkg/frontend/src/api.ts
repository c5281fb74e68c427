// HTTP client for the ppgkit service. The UI never computes distances or
// edits locally; every number it shows came through this interface.

import {
    CreateResponse,
    DistanceResult,
    DocumentInfo,
    DocumentView,
    EditRequest,
    EditResponse,
    JsonDocument,
} from "./types";

export class ApiError extends Error {
    constructor(public status: number, public detail: string) {
        super(`HTTP ${status}: ${detail}`);
    }
}

export interface Api {
    listDocuments(): Promise<DocumentInfo[]>;
    uploadJson(doc: JsonDocument): Promise<CreateResponse>;
    uploadBinary(data: ArrayBuffer, label?: string): Promise<CreateResponse>;
    getDocument(id: string, filterBelow: number): Promise<DocumentView>;
    downloadBinary(id: string): Promise<ArrayBuffer>;
    edit(id: string, request: EditRequest): Promise<EditResponse>;
    distance(idA: string, idB: string, gamma?: number): Promise<DistanceResult>;
}

async function raiseForStatus(response: Response): Promise<void> {
    if (response.ok) {
        return;
    }
    let detail = response.statusText;
    try {
        const body = await response.json();
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
        // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
}

export class HttpApi implements Api {
    constructor(private baseUrl: string) {}

    private url(path: string): string {
        return this.baseUrl.replace(/\/$/, "") + path;
    }

    private async getJson<T>(path: string): Promise<T> {
        const response = await fetch(this.url(path));
        await raiseForStatus(response);
        return (await response.json()) as T;
    }

    private async postJson<T>(path: string, body: unknown): Promise<T> {
        const response = await fetch(this.url(path), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
        await raiseForStatus(response);
        return (await response.json()) as T;
    }

    listDocuments(): Promise<DocumentInfo[]> {
        return this.getJson("/documents");
    }

    uploadJson(doc: JsonDocument): Promise<CreateResponse> {
        return this.postJson("/documents", doc);
    }

    async uploadBinary(data: ArrayBuffer, label?: string): Promise<CreateResponse> {
        const suffix = label ? `?label=${encodeURIComponent(label)}` : "";
        const response = await fetch(this.url(`/documents${suffix}`), {
            method: "POST",
            headers: { "content-type": "application/octet-stream" },
            body: data,
        });
        await raiseForStatus(response);
        return (await response.json()) as CreateResponse;
    }

    getDocument(id: string, filterBelow: number): Promise<DocumentView> {
        return this.getJson(`/documents/${id}?filter_below=${filterBelow}`);
    }

    async downloadBinary(id: string): Promise<ArrayBuffer> {
        const response = await fetch(this.url(`/documents/${id}/binary`));
        await raiseForStatus(response);
        return await response.arrayBuffer();
    }

    edit(id: string, request: EditRequest): Promise<EditResponse> {
        return this.postJson(`/documents/${id}/edit`, request);
    }

    distance(idA: string, idB: string, gamma?: number): Promise<DistanceResult> {
        const body: Record<string, unknown> = { id_a: idA, id_b: idB };
        if (gamma !== undefined) {
            body.gamma = gamma;
        }
        return this.postJson("/distance", body);
    }
}
