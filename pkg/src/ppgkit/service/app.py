"""FastAPI application wrapping the library for the editor UI.

Documents are posteriorgrams under optimistic concurrency: every mutation
names the version it was based on and conflicts get 409 with no state
change. Edit responses include the per-frame distance between the previous
and new state so a client can show the effect of each edit immediately.
"""

from __future__ import annotations

import io
import json
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import Depends, FastAPI, HTTPException, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from ..core import Ppg, argmax_collapse, run_length_encode, validate
from ..distance import DEFAULT_GAMMA, DistanceConfig, utterance_distance
from ..edit import apply_rules, compile_rules, interpolate_region, set_region
from ..errors import FormatError, PpgError, ValidationError
from ..formats import ppg_from_json_obj, ppg_to_json_obj, read_ppg, write_ppg
from .schemas import (
    CreateDocumentResponse,
    DistanceModel,
    DistanceRequest,
    DocumentInfo,
    DocumentSummary,
    DocumentView,
    EditReportModel,
    EditRequest,
    EditResponse,
    InterpolateOperation,
    RulesOperation,
    RunModel,
    SetRegionOperation,
)
from .store import DocumentStore, VersionConflictError

# Probabilities in JSON responses round to this many significant digits,
# which preserves the float32 storage grid exactly.
TRANSIT_SIG_DIGITS = 9


def get_store(request: Request) -> DocumentStore:
    return request.app.state.store


def _summary(ppg: Ppg) -> DocumentSummary:
    runs = run_length_encode(argmax_collapse(ppg))
    labels = ppg.phoneme_set.labels
    return DocumentSummary(
        num_frames=ppg.num_frames,
        num_phonemes=ppg.num_phonemes,
        hop_seconds=ppg.hop_seconds,
        runs=[
            RunModel(phoneme=labels[r.phoneme], start=r.start, length=r.length)
            for r in runs.runs
        ],
    )


def _snapshot_or_404(store: DocumentStore, doc_id: str):
    try:
        return store.snapshot(doc_id)
    except KeyError:
        raise HTTPException(status_code=404, detail=f"unknown document {doc_id!r}")


def _parse_upload(body: bytes, content_type: str) -> tuple[Ppg, Optional[str]]:
    if content_type.startswith("application/json"):
        try:
            obj = json.loads(body)
        except json.JSONDecodeError as exc:
            raise HTTPException(status_code=400, detail=f"invalid JSON: {exc}")
        label = obj.pop("label", None) if isinstance(obj, dict) else None
        try:
            return ppg_from_json_obj(obj), label
        except PpgError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
    try:
        return read_ppg(io.BytesIO(body)), None
    except PpgError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def create_app(
    data_dir: Optional[Path] = None, ui_dir: Optional[Path] = None
) -> FastAPI:
    app = FastAPI(title="ppgkit service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = DocumentStore(data_dir)

    @app.post(
        "/documents", status_code=201, response_model=CreateDocumentResponse
    )
    async def create_document(
        request: Request,
        label: Optional[str] = None,
        store: DocumentStore = Depends(get_store),
    ):
        body = await request.body()
        ppg, body_label = _parse_upload(
            body, request.headers.get("content-type", "")
        )
        violations = validate(ppg)
        if violations:
            raise HTTPException(
                status_code=400,
                detail=[v.message for v in violations[:10]],
            )
        document = store.create(ppg, label or body_label)
        return CreateDocumentResponse(
            id=document.id, version=document.state[0], summary=_summary(ppg)
        )

    @app.get("/documents", response_model=list[DocumentInfo])
    def list_documents(store: DocumentStore = Depends(get_store)):
        return [
            DocumentInfo(
                id=doc_id,
                version=version,
                label=label,
                num_frames=ppg.num_frames,
                num_phonemes=ppg.num_phonemes,
                hop_seconds=ppg.hop_seconds,
            )
            for doc_id, version, ppg, label in store.list()
        ]

    @app.get("/documents/{doc_id}", response_model=DocumentView)
    def get_document(
        doc_id: str,
        filter_below: float = Query(0.0, ge=0.0, le=1.0),
        store: DocumentStore = Depends(get_store),
    ):
        version, ppg, label = _snapshot_or_404(store, doc_id)
        if ppg.num_frames:
            row_max = ppg.frames.max(axis=0)
            active = [int(p) for p in np.flatnonzero(row_max >= filter_below)]
        else:
            active = []
        return DocumentView(
            id=doc_id,
            version=version,
            label=label,
            hop_seconds=ppg.hop_seconds,
            phonemes=list(ppg.phoneme_set.labels),
            frames=ppg_to_json_obj(ppg, sig_digits=TRANSIT_SIG_DIGITS)["frames"],
            active_rows=active,
        )

    @app.get("/documents/{doc_id}/binary")
    def get_document_binary(
        doc_id: str, store: DocumentStore = Depends(get_store)
    ):
        _, ppg, label = _snapshot_or_404(store, doc_id)
        buffer = io.BytesIO()
        write_ppg(ppg, buffer)
        return Response(
            content=buffer.getvalue(),
            media_type="application/octet-stream",
            headers={
                "Content-Disposition": f'attachment; filename="{doc_id}.ppg"'
            },
        )

    @app.post("/documents/{doc_id}/edit", response_model=EditResponse)
    def edit_document(
        doc_id: str,
        body: EditRequest,
        store: DocumentStore = Depends(get_store),
    ):
        _, snapshot, _ = _snapshot_or_404(store, doc_id)
        if snapshot.num_frames == 0:
            raise HTTPException(status_code=422, detail="document has no frames")
        report_holder: list = [None]
        operation = body.operation

        if isinstance(operation, RulesOperation):
            try:
                rules = compile_rules(operation.rules, snapshot.phoneme_set)
            except PpgError as exc:
                raise HTTPException(status_code=422, detail=str(exc))

            def mutate(current: Ppg) -> Ppg:
                edited, report = apply_rules(current, rules)
                report_holder[0] = EditReportModel(**report.to_dict())
                return edited

        elif isinstance(operation, SetRegionOperation):

            def mutate(current: Ppg) -> Ppg:
                return set_region(
                    current,
                    (operation.start, operation.end),
                    np.asarray(operation.target, dtype=np.float64),
                )

        elif isinstance(operation, InterpolateOperation):
            try:
                _, other, _ = store.snapshot(operation.other_id)
            except KeyError:
                raise HTTPException(
                    status_code=422,
                    detail=f"unknown other_id {operation.other_id!r}",
                )

            def mutate(current: Ppg) -> Ppg:
                span = (
                    operation.start if operation.start is not None else 0,
                    operation.end
                    if operation.end is not None
                    else current.num_frames,
                )
                return interpolate_region(current, other, span, operation.t)

        else:  # unreachable given the discriminated union
            raise HTTPException(status_code=422, detail="unknown operation type")

        try:
            new_version, previous, updated = store.mutate(
                doc_id, body.base_version, mutate
            )
        except VersionConflictError as exc:
            raise HTTPException(
                status_code=409,
                detail={
                    "message": str(exc),
                    "current_version": exc.current,
                },
            )
        except (ValidationError, FormatError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))

        feedback = utterance_distance(previous, updated, DistanceConfig())
        return EditResponse(
            id=doc_id,
            version=new_version,
            edit_report=report_holder[0],
            framewise_distance_to_previous=DistanceModel(
                mean=feedback.mean, curve=feedback.curve.tolist()
            ),
        )

    @app.post("/distance", response_model=DistanceModel)
    def document_distance(
        body: DistanceRequest, store: DocumentStore = Depends(get_store)
    ):
        _, a, _ = _snapshot_or_404(store, body.id_a)
        _, b, _ = _snapshot_or_404(store, body.id_b)
        gamma = body.gamma if body.gamma is not None else DEFAULT_GAMMA
        try:
            result = utterance_distance(a, b, DistanceConfig(gamma=gamma))
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return DistanceModel(mean=result.mean, curve=result.curve.tolist())

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
