// Entry point: mount the editor against the service. The API base URL
// comes from ?api=... or defaults to the page's own origin (the service
// can serve this bundle directly via `ppgkit serve --ui-dir`).

import { HttpApi } from "./api";
import { EditorApp } from "./app";

function apiBaseUrl(): string {
    const override = new URLSearchParams(window.location.search).get("api");
    if (override) {
        return override;
    }
    if (window.location.protocol.startsWith("http")) {
        return window.location.origin;
    }
    return "http://127.0.0.1:8000";
}

document.addEventListener("DOMContentLoaded", () => {
    const container = document.getElementById("app");
    if (!container) {
        throw new Error("missing #app container");
    }
    const app = new EditorApp(container, new HttpApi(apiBaseUrl()));
    void app.refreshDocumentList();
});
