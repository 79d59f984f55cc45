"""End-to-end inference for one support/auxiliary/query task.

Pipeline: pool the support map into labeled local prototypes, pool each
auxiliary map into unlabeled prototypes, take the query pixels as
vertices, propagate labels over the similarity graph, turn the query
block into a confidence map, fuse it with prototype similarity, apply
spatial consistency calibration, and threshold into a binary mask.
Every intermediate is kept on the result for inspection.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import poisson, prototype, scc
from .errors import PoissonPropError
from .graph import VertexSet, WeightedGraph, build_weight_graph
from .metrics import dsc
from .poisson import ConfidenceMap, LabelSource, PropagationResult
from .prototype import FOREGROUND, LocalPrototype, PrototypeVector
from .scc import LinearParams, TwoLayerParams
from .tensor import FeatureMap, SoftMask, downsample_mask

PREDICTION_MODES = ("poisson", "calibrated")


@dataclass(frozen=True)
class EpisodeConfig:
    """Pipeline knobs; field defaults are the documented defaults."""

    window: tuple[int, int] = (4, 4)
    knn_k: int = 10
    tol: float = 1e-6
    t_max: int = 1000
    label_threshold: float = 0.5
    prediction_threshold: float = 0.5
    prediction_mode: str = "poisson"
    sim_params: LinearParams | None = None
    calibration_params: TwoLayerParams | None = None

    def __post_init__(self):
        if self.prediction_mode not in PREDICTION_MODES:
            raise ValueError(
                f"prediction_mode must be one of {PREDICTION_MODES}, "
                f"got {self.prediction_mode!r}"
            )
        if not 0.0 < self.prediction_threshold < 1.0:
            raise ValueError("prediction_threshold must be in (0, 1)")


@dataclass(frozen=True)
class Episode:
    """One task: labeled support, unlabeled auxiliary maps, one query."""

    support: tuple[FeatureMap, SoftMask]
    auxiliary: tuple[FeatureMap, ...]
    query: FeatureMap
    query_mask: SoftMask | None = None
    config: EpisodeConfig = field(default_factory=EpisodeConfig)

    def __post_init__(self):
        object.__setattr__(self, "auxiliary", tuple(self.auxiliary))
        sup_map, sup_mask = self.support
        shape = sup_map.data.shape
        for i, aux in enumerate(self.auxiliary):
            if aux.data.shape != shape:
                raise ValueError(
                    f"auxiliary map {i} shape {aux.data.shape} != support {shape}"
                )
        if self.query.data.shape != shape:
            raise ValueError(
                f"query shape {self.query.data.shape} != support {shape}"
            )
        if sup_mask.data.shape != shape[1:]:
            raise ValueError(
                f"support mask {sup_mask.data.shape} != spatial dims {shape[1:]}"
            )
        if self.query_mask is not None and self.query_mask.data.shape != shape[1:]:
            raise ValueError(
                f"query mask {self.query_mask.data.shape} != spatial dims {shape[1:]}"
            )


@dataclass(frozen=True)
class EpisodeResult:
    """All pipeline outputs and intermediates for one episode."""

    config: EpisodeConfig
    support_prototypes: list[LocalPrototype]
    auxiliary_prototypes: list[LocalPrototype]
    grid_mask: SoftMask
    vertex_set: VertexSet
    graph: WeightedGraph
    source: LabelSource
    propagation: PropagationResult
    confidence: ConfidenceMap
    global_prototype: PrototypeVector
    similarity: FeatureMap
    fused: FeatureMap
    calibrated: FeatureMap
    mask_poisson: np.ndarray = field(repr=False)
    mask_calibrated: np.ndarray = field(repr=False)
    dsc_poisson: float | None = None
    dsc_calibrated: float | None = None

    @property
    def predicted_mask(self) -> np.ndarray:
        if self.config.prediction_mode == "poisson":
            return self.mask_poisson
        return self.mask_calibrated

    @property
    def dsc_score(self) -> float | None:
        if self.config.prediction_mode == "poisson":
            return self.dsc_poisson
        return self.dsc_calibrated


def predict_mask(
    confidence: ConfidenceMap,
    calibrated: FeatureMap,
    threshold: float = 0.5,
    mode: str = "poisson",
) -> np.ndarray:
    """Binary foreground mask at feature resolution.

    "poisson" thresholds the confidence map directly; "calibrated"
    thresholds the channel mean of the calibrated map. The threshold is
    inclusive (values equal to it are foreground).
    """
    if mode not in PREDICTION_MODES:
        raise ValueError(f"mode must be one of {PREDICTION_MODES}, got {mode!r}")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    if mode == "poisson":
        values = confidence.values
    else:
        values = calibrated.data.mean(axis=0)
    return (values >= threshold).astype(np.uint8)


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PoissonPropError as err:
        raise type(err)(f"stage {name}: {err}") from err


def run_episode(ep: Episode) -> EpisodeResult:
    """Run the full pipeline on one episode."""
    cfg = ep.config
    sup_map, sup_mask = ep.support

    sup_protos = _stage(
        "support-pooling", prototype.local_prototype_pool, sup_map, cfg.window
    )
    grid_h = sup_map.height // cfg.window[0]
    grid_w = sup_map.width // cfg.window[1]
    grid_mask = _stage(
        "mask-downsampling", downsample_mask, sup_mask, (grid_h, grid_w)
    )
    sup_protos = _stage(
        "prototype-labeling",
        prototype.assign_prototype_labels,
        sup_protos,
        grid_mask,
        cfg.label_threshold,
    )
    aux_protos: list[LocalPrototype] = []
    for aux in ep.auxiliary:
        aux_protos.extend(
            _stage("auxiliary-pooling", prototype.local_prototype_pool, aux, cfg.window)
        )

    query_pixels = ep.query.pixel_vectors()
    points = np.concatenate(
        [
            np.stack([p.vector for p in sup_protos]),
            np.stack([p.vector for p in aux_protos])
            if aux_protos
            else np.empty((0, sup_map.channels)),
            query_pixels,
        ]
    )
    labels = np.array(
        [1 if p.label == FOREGROUND else 0 for p in sup_protos], dtype=np.int64
    )
    vertices = VertexSet(
        points=points,
        n_s=len(sup_protos),
        n_a=len(aux_protos),
        n_q=query_pixels.shape[0],
        labels=labels,
        k=2,
    )

    graph = _stage("graph-build", build_weight_graph, vertices.points, cfg.knn_k)
    source = _stage(
        "source-build",
        poisson.build_source,
        vertices.one_hot_labels(),
        vertices.n,
        vertices.k,
    )
    propagation = _stage(
        "propagation", poisson.solve_iterative, graph, source, cfg.t_max, cfg.tol
    )
    confidence = _stage(
        "confidence-extraction",
        poisson.extract_confidence_map,
        propagation,
        vertices.n_q,
        ep.query.height,
        ep.query.width,
    )
    global_proto = _stage(
        "global-prototype", prototype.masked_average_pool, sup_map, sup_mask
    )
    similarity = _stage(
        "similarity-map", scc.similarity_map, ep.query, global_proto, cfg.sim_params
    )
    fused = _stage("confidence-fusion", scc.fuse_confidence, similarity, confidence)
    calibrated = _stage(
        "calibration", scc.spatial_consistency_calibrate, fused, cfg.calibration_params
    )

    mask_poisson = predict_mask(
        confidence, calibrated, cfg.prediction_threshold, "poisson"
    )
    mask_calibrated = predict_mask(
        confidence, calibrated, cfg.prediction_threshold, "calibrated"
    )

    dsc_poisson = dsc_calibrated = None
    if ep.query_mask is not None:
        truth = (ep.query_mask.data >= 0.5).astype(np.uint8)
        dsc_poisson = dsc(mask_poisson, truth)
        dsc_calibrated = dsc(mask_calibrated, truth)

    return EpisodeResult(
        config=cfg,
        support_prototypes=sup_protos,
        auxiliary_prototypes=aux_protos,
        grid_mask=grid_mask,
        vertex_set=vertices,
        graph=graph,
        source=source,
        propagation=propagation,
        confidence=confidence,
        global_prototype=global_proto,
        similarity=similarity,
        fused=fused,
        calibrated=calibrated,
        mask_poisson=mask_poisson,
        mask_calibrated=mask_calibrated,
        dsc_poisson=dsc_poisson,
        dsc_calibrated=dsc_calibrated,
    )


def with_config(ep: Episode, **overrides) -> Episode:
    """Copy an episode with config fields replaced."""
    return replace(ep, config=replace(ep.config, **overrides))
