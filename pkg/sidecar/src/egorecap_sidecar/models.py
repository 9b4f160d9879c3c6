"""Backends over real checkpoints, imported lazily so the stub path stays light.

Nothing here touches torch, torchvision, transformers, or PIL at import time:
each backend loads its dependencies and weights on first use, which keeps
``describe`` answerable before any weights are resident and lets the sidecar
start on machines that only need the stubs. Failures map onto the protocol's
error taxonomy:

* a frame without an image locator, or an unreadable one, is the caller's
  problem — ``bad_request``;
* a checkpoint that cannot load or blows up during inference is a ``model``
  fault naming the role, marked retryable only for memory exhaustion;
* output that breaks the declared role contract (wrong curve length, empty
  caption text) is a ``contract`` breach.

Preprocessing follows whatever the wrapped checkpoint ships (torchvision
weight transforms, HF processors) rather than re-deriving it here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .protocol import (
    ROLE_CAPTIONER,
    ROLE_FRAME_FEATURES,
    ROLE_IMPORTANCE,
    ROLE_JOINT_EMBEDDING,
    BadRequest,
    CaptionCall,
    ContractBreach,
    FrameRef,
    ModelFault,
    SegmentRef,
    WireFault,
    is_memory_exhaustion,
)

DEFAULT_CLIP_MODEL = "openai/clip-vit-large-patch14"
DEFAULT_CAPTION_MODEL = "Salesforce/blip-image-captioning-base"

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)


def _fault(role: str, phase: str, exc: BaseException) -> ModelFault:
    return ModelFault(
        f"{role}: {phase}: {type(exc).__name__}: {exc}",
        retryable=is_memory_exhaustion(exc),
    )


def _load_image(ref: FrameRef):
    """The PIL image behind one frame reference; locator problems are the caller's."""
    if ref.image is None:
        raise BadRequest(f"frame {ref.index} carries no image locator")
    from PIL import Image

    try:
        with Image.open(ref.image) as img:
            return img.convert("RGB")
    except OSError as exc:
        raise BadRequest(f"cannot read image for frame {ref.index}: {exc}") from exc


@dataclass
class TorchvisionFrameFeatures:
    """Per-frame features from a resnet18 trunk with the head removed."""

    weights: Optional[str] = "IMAGENET1K_V1"
    dim: int = 512
    batch_size: int = 16

    role = ROLE_FRAME_FEATURES
    max_inflight = 1
    serialize = True

    _net: Any = field(default=None, init=False, repr=False)
    _prep: Any = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.version = f"torchvision-resnet18/{self.weights or 'untrained'}"

    def _load(self):
        if self._net is not None:
            return
        try:
            import torch
            from torchvision import models, transforms

            if self.weights is not None:
                tag = models.ResNet18_Weights[self.weights]
                prep = tag.transforms()
            else:
                tag = None
                prep = transforms.Compose(
                    [
                        transforms.Resize(256),
                        transforms.CenterCrop(224),
                        transforms.ToTensor(),
                        transforms.Normalize(mean=_IMAGENET_MEAN, std=_IMAGENET_STD),
                    ]
                )
            net = models.resnet18(weights=tag)
            net.fc = torch.nn.Identity()
            net.eval()
        except Exception as exc:
            raise _fault(self.role, "model failed to load", exc) from exc
        self._net, self._prep = net, prep

    def embed_frames(self, frames: list[FrameRef]) -> np.ndarray:
        self._load()
        if not frames:
            return np.zeros((0, self.dim), dtype=np.float32)
        import torch

        tensors = [self._prep(_load_image(f)) for f in frames]
        try:
            chunks = []
            with torch.no_grad():
                for i in range(0, len(tensors), self.batch_size):
                    batch = torch.stack(tensors[i : i + self.batch_size])
                    chunks.append(self._net(batch).cpu().numpy().astype(np.float32))
            out = np.concatenate(chunks, axis=0)
        except WireFault:
            raise
        except Exception as exc:
            raise _fault(self.role, "inference failed", exc) from exc
        if out.shape[1] != self.dim:
            raise ModelFault(
                f"{self.role}: checkpoint produces {out.shape[1]}-dim features, "
                f"configured for {self.dim}"
            )
        return out


@dataclass
class TorchscriptImportance:
    """Frame-importance curve from a scripted module: (n, d) float32 → (n,)."""

    path: str

    role = ROLE_IMPORTANCE
    dim = 1
    max_inflight = 1
    serialize = True

    _net: Any = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.version = f"torchscript-importance/{Path(self.path).name}"

    def _load(self):
        if self._net is not None:
            return
        try:
            import torch

            net = torch.jit.load(self.path, map_location="cpu")
            net.eval()
        except Exception as exc:
            raise _fault(self.role, "model failed to load", exc) from exc
        self._net = net

    def score_importance(self, features: np.ndarray) -> np.ndarray:
        self._load()
        import torch

        rows = np.ascontiguousarray(features, dtype=np.float32)
        try:
            with torch.no_grad():
                out = self._net(torch.from_numpy(rows))
            scores = np.asarray(out.detach().cpu().numpy(), dtype=np.float64).ravel()
        except Exception as exc:
            raise _fault(self.role, "inference failed", exc) from exc
        if scores.shape[0] != rows.shape[0]:
            raise ContractBreach(
                f"importance model returned {scores.shape[0]} scores "
                f"for {rows.shape[0]} frames"
            )
        return scores


@dataclass
class HfClipJointEmbedding:
    """A two-tower image/text checkpoint serving the shared query space."""

    model_id: str = DEFAULT_CLIP_MODEL
    dim: int = 768
    segment_len_s: Optional[float] = 8.0
    batch_size: int = 8

    role = ROLE_JOINT_EMBEDDING
    max_inflight = 1
    serialize = True

    _model: Any = field(default=None, init=False, repr=False)
    _processor: Any = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.version = f"hf-clip/{self.model_id}"

    def _load(self):
        if self._model is not None:
            return
        try:
            from transformers import CLIPModel, CLIPProcessor

            model = CLIPModel.from_pretrained(self.model_id)
            model.eval()
            processor = CLIPProcessor.from_pretrained(self.model_id)
        except Exception as exc:
            raise _fault(self.role, "model failed to load", exc) from exc
        projected = int(model.config.projection_dim)
        if projected != self.dim:
            raise ModelFault(
                f"{self.role}: checkpoint embeds into {projected} dims, "
                f"configured for {self.dim}"
            )
        self._model, self._processor = model, processor

    def _embed_images(self, images) -> np.ndarray:
        import torch

        chunks = []
        try:
            with torch.no_grad():
                for i in range(0, len(images), self.batch_size):
                    inputs = self._processor(
                        images=images[i : i + self.batch_size], return_tensors="pt"
                    )
                    feats = self._model.get_image_features(**inputs)
                    chunks.append(feats.cpu().numpy().astype(np.float32))
        except WireFault:
            raise
        except Exception as exc:
            raise _fault(self.role, "inference failed", exc) from exc
        out = np.concatenate(chunks, axis=0)
        return out / np.linalg.norm(out, axis=1, keepdims=True)

    def embed_frames(self, frames: list[FrameRef]) -> np.ndarray:
        self._load()
        if not frames:
            return np.zeros((0, self.dim), dtype=np.float32)
        return self._embed_images([_load_image(f) for f in frames])

    def embed_segments(self, segments: list[SegmentRef]) -> np.ndarray:
        self._load()
        if self.segment_len_s is not None:
            for seg in segments:
                if abs(seg.duration_s - self.segment_len_s) > 1e-9:
                    raise ContractBreach(
                        f"segment [{seg.start}, {seg.end}) lasts {seg.duration_s}s, "
                        f"this backend embeds fixed {self.segment_len_s}s clips"
                    )
        if not segments:
            return np.zeros((0, self.dim), dtype=np.float32)
        rows = []
        for seg in segments:
            if not seg.images:
                raise BadRequest(
                    f"segment [{seg.start}, {seg.end}) carries no image locators"
                )
            frames = [
                FrameRef(index=seg.start + i, rate=seg.rate, image=path)
                for i, path in enumerate(seg.images)
            ]
            pooled = self._embed_images([_load_image(f) for f in frames]).mean(axis=0)
            rows.append(pooled / np.linalg.norm(pooled))
        return np.stack(rows).astype(np.float32)

    def embed_text(self, text: str) -> np.ndarray:
        self._load()
        import torch

        try:
            with torch.no_grad():
                inputs = self._processor(
                    text=[text], return_tensors="pt", padding=True, truncation=True
                )
                feats = self._model.get_text_features(**inputs)
        except Exception as exc:
            raise _fault(self.role, "inference failed", exc) from exc
        vec = feats.cpu().numpy().astype(np.float32).ravel()
        return vec / np.linalg.norm(vec)


@dataclass
class HfImageCaptioner:
    """One-sentence answers from an image-to-text checkpoint.

    The temporally central frame of the sample stands in for the clip; the
    length penalty divides the generation budget, so harsher penalties yield
    shorter sentences.
    """

    model_id: str = DEFAULT_CAPTION_MODEL
    max_new_tokens_base: int = 40

    role = ROLE_CAPTIONER
    dim = None
    max_inflight = 1
    serialize = True

    _pipe: Any = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.version = f"hf-captioner/{self.model_id}"

    def _load(self):
        if self._pipe is not None:
            return
        try:
            from transformers import pipeline

            self._pipe = pipeline("image-to-text", model=self.model_id)
        except Exception as exc:
            raise _fault(self.role, "model failed to load", exc) from exc

    def caption(self, call: CaptionCall) -> str:
        self._load()
        located = [f for f in call.frames if f.image is not None]
        if not located:
            raise BadRequest("caption request carries no image locators")
        image = _load_image(located[len(located) // 2])
        budget = max(8, round(self.max_new_tokens_base / max(call.length_penalty, 0.25)))
        try:
            try:
                out = self._pipe(image, prompt=call.prompt, max_new_tokens=budget)
            except TypeError:  # pipelines for unconditional models take no prompt
                out = self._pipe(image, max_new_tokens=budget)
        except WireFault:
            raise
        except Exception as exc:
            raise _fault(self.role, "inference failed", exc) from exc
        text = str((out or [{}])[0].get("generated_text") or "").strip()
        if not text:
            raise ContractBreach("captioner produced empty text")
        if not text.endswith((".", "!", "?")):
            text += "."
        return text[0].upper() + text[1:]
