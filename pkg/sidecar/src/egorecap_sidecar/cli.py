"""Command line: pick a backend per role, then serve the protocol over HTTP.

Each role takes a backend spec of the form ``kind`` or ``kind:argument``:

* ``--frame-features``  ``stub[:DIM]`` | ``resnet18[:WEIGHTS]``
* ``--importance``      ``stub`` | ``torchscript:PATH``
* ``--joint``           ``stub[:DIM]`` | ``clip[:MODEL_ID]``
* ``--captioner``       ``stub`` | ``hf[:MODEL_ID]``

Stubs answer deterministically with no weights; the rest load checkpoints
lazily on first use, so the server comes up fast and reports load failures
in-band as protocol errors.
"""

from __future__ import annotations

import argparse
from typing import Optional

from .backends import (
    DEFAULT_SEGMENT_LEN_S,
    StubCaptioner,
    StubFrameFeatures,
    StubImportance,
    StubJointEmbedding,
)
from .protocol import (
    ROLE_CAPTIONER,
    ROLE_FRAME_FEATURES,
    ROLE_IMPORTANCE,
    ROLE_JOINT_EMBEDDING,
    ROLES,
)
from .service import build_app

DEFAULT_PORT = 8800


def _split_spec(spec: str) -> tuple[str, Optional[str]]:
    kind, _, arg = spec.partition(":")
    return kind, (arg or None)


def build_backend(role: str, spec: str, segment_len_s: Optional[float]):
    """One backend from its spec string; unknown specs raise ValueError."""
    kind, arg = _split_spec(spec)
    if role == ROLE_FRAME_FEATURES:
        if kind == "stub":
            return StubFrameFeatures(dim=int(arg)) if arg else StubFrameFeatures()
        if kind == "resnet18":
            from .models import TorchvisionFrameFeatures

            return TorchvisionFrameFeatures(weights=arg or "IMAGENET1K_V1")
    elif role == ROLE_IMPORTANCE:
        if kind == "stub":
            return StubImportance()
        if kind == "torchscript":
            if not arg:
                raise ValueError("torchscript backend needs a path: torchscript:PATH")
            from .models import TorchscriptImportance

            return TorchscriptImportance(path=arg)
    elif role == ROLE_JOINT_EMBEDDING:
        if kind == "stub":
            kwargs = {"segment_len_s": segment_len_s}
            if arg:
                kwargs["dim"] = int(arg)
            return StubJointEmbedding(**kwargs)
        if kind == "clip":
            from .models import DEFAULT_CLIP_MODEL, HfClipJointEmbedding

            return HfClipJointEmbedding(
                model_id=arg or DEFAULT_CLIP_MODEL, segment_len_s=segment_len_s
            )
    elif role == ROLE_CAPTIONER:
        if kind == "stub":
            return StubCaptioner()
        if kind == "hf":
            from .models import DEFAULT_CAPTION_MODEL, HfImageCaptioner

            return HfImageCaptioner(model_id=arg or DEFAULT_CAPTION_MODEL)
    raise ValueError(f"unknown backend {spec!r} for role {role}")


def build_backends(args: argparse.Namespace) -> dict:
    specs = {
        ROLE_FRAME_FEATURES: args.frame_features,
        ROLE_IMPORTANCE: args.importance,
        ROLE_JOINT_EMBEDDING: args.joint,
        ROLE_CAPTIONER: args.captioner,
    }
    segment_len_s = args.segment_len if args.segment_len > 0 else None
    return {
        role: build_backend(role, specs[role], segment_len_s) for role in args.roles
    }


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="egorecap-sidecar",
        description="Serve model backends for the summarization engine's provider protocol.",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=DEFAULT_PORT)
    parser.add_argument(
        "--roles",
        nargs="+",
        choices=ROLES,
        default=list(ROLES),
        help="serve only these roles (default: all four)",
    )
    parser.add_argument("--frame-features", default="stub", metavar="SPEC")
    parser.add_argument("--importance", default="stub", metavar="SPEC")
    parser.add_argument("--joint", default="stub", metavar="SPEC")
    parser.add_argument("--captioner", default="stub", metavar="SPEC")
    parser.add_argument(
        "--segment-len",
        type=float,
        default=DEFAULT_SEGMENT_LEN_S,
        help="fixed clip length the joint role accepts, in seconds; 0 disables the check",
    )
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        backends = build_backends(args)
    except ValueError as exc:
        parser.error(str(exc))
    app = build_app(backends)

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
