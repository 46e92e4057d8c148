"""
Evaluation metrics: volumetric (Dice, clDice, ACC, AUC), clustering (ARI, VOI)
and topological (Betti number and Euler characteristic errors).

Connectivity conventions:
- components (beta0, ARI, VOI labels) are 8-connected, background is label 0
- chi = V - E + F on the pixel complex: V foreground pixels, E 4-adjacent
  foreground pairs, F fully foreground 2x2 blocks
- beta1 = beta0 - chi, clamped at 0
"""

import math

import numpy as np
from scipy import ndimage
from skimage.metrics import variation_of_information
from sklearn.metrics import adjusted_rand_score, roc_auc_score

from .config import DEFAULT_PATCH, DEFAULT_TOL
from .errors import ShapeMismatchError
from .logger import logger
from .schema import MetricsReport, Raster, TopoSignature
from .skeleton import skeleton_array
from .utils import label8

MaskLike = Raster | np.ndarray


def _bool(mask: MaskLike) -> np.ndarray:
    values = mask.values if isinstance(mask, Raster) else np.asarray(mask)
    return values > 0


def _pair(pred: MaskLike, gt: MaskLike) -> tuple[np.ndarray, np.ndarray]:
    p, g = _bool(pred), _bool(gt)
    if p.shape != g.shape:
        raise ShapeMismatchError(f"prediction is {p.shape} but ground truth is {g.shape}")
    return p, g


def dice(pred: MaskLike, gt: MaskLike) -> float:
    p, g = _pair(pred, gt)
    total = int(p.sum()) + int(g.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((p & g).sum()) / total


def acc(pred: MaskLike, gt: MaskLike) -> float:
    p, g = _pair(pred, gt)
    return int((p == g).sum()) / p.size


def cl_dice(pred: MaskLike, gt: MaskLike) -> float:
    """
    Harmonic mean of skeleton precision |S(P) & G| / |S(P)| and skeleton
    sensitivity |S(G) & P| / |S(G)|. Both skeletons empty scores 1, one empty 0.
    """
    p, g = _pair(pred, gt)
    skel_p = skeleton_array(p).astype(bool)
    skel_g = skeleton_array(g).astype(bool)
    if not skel_p.any() and not skel_g.any():
        return 1.0
    if not skel_p.any() or not skel_g.any():
        return 0.0
    t_prec = (skel_p & g).sum() / skel_p.sum()
    t_sens = (skel_g & p).sum() / skel_g.sum()
    if t_prec + t_sens == 0:
        return 0.0
    return float(2.0 * t_prec * t_sens / (t_prec + t_sens))


def _signature(m: np.ndarray) -> TopoSignature:
    _, beta0 = label8(m)
    vertices = int(m.sum())
    edges = int((m[:, 1:] & m[:, :-1]).sum()) + int((m[1:, :] & m[:-1, :]).sum())
    faces = int((m[1:, 1:] & m[1:, :-1] & m[:-1, 1:] & m[:-1, :-1]).sum())
    chi = vertices - edges + faces
    return TopoSignature(beta0=beta0, chi=chi, clamped=beta0 - chi < 0)


def betti(mask: MaskLike) -> TopoSignature:
    signature = _signature(_bool(mask))
    if signature.clamped:
        logger.warning(
            f"⚠️ beta0 - chi = {signature.beta0 - signature.chi} < 0; beta1 clamped to 0"
        )
    return signature


def topo_errors(
    pred: MaskLike, gt: MaskLike, patch: int = DEFAULT_PATCH
) -> tuple[float, float, float]:
    """
    Mean absolute beta0, beta1 and chi differences over patch x patch tiles.

    Remainder tiles at the right and bottom edges are kept at their smaller size.

    Returns:
        tuple: (beta0_err, beta1_err, chi_err)
    """
    p, g = _pair(pred, gt)
    if patch <= 0:
        raise ValueError(f"patch must be positive, got {patch}")
    height, width = p.shape
    errors = []
    clamped = 0
    for row in range(0, height, patch):
        for col in range(0, width, patch):
            sp = _signature(p[row : row + patch, col : col + patch])
            sg = _signature(g[row : row + patch, col : col + patch])
            clamped += sp.clamped + sg.clamped
            errors.append(
                (abs(sp.beta0 - sg.beta0), abs(sp.beta1 - sg.beta1), abs(sp.chi - sg.chi))
            )
    if clamped:
        logger.warning(f"⚠️ beta1 clamped to 0 on {clamped} tiles")
    beta0_err, beta1_err, chi_err = np.mean(np.array(errors, dtype=np.float64), axis=0)
    return float(beta0_err), float(beta1_err), float(chi_err)


def _component_labels(pred: MaskLike, gt: MaskLike) -> tuple[np.ndarray, np.ndarray]:
    p, g = _pair(pred, gt)
    return label8(p)[0], label8(g)[0]


def ari(pred: MaskLike, gt: MaskLike) -> float:
    """Adjusted Rand index between the component labelings (background is a cluster)."""
    labels_p, labels_g = _component_labels(pred, gt)
    return float(adjusted_rand_score(labels_g.ravel(), labels_p.ravel()))


def voi(pred: MaskLike, gt: MaskLike) -> float:
    """Variation of information H(P|G) + H(G|P) of the component labelings, in nats."""
    labels_p, labels_g = _component_labels(pred, gt)
    # skimage reports bits
    conditional = variation_of_information(labels_g, labels_p)
    return max(0.0, float(np.sum(conditional)) * math.log(2.0))


def _distance_to(mask: np.ndarray) -> np.ndarray:
    """Euclidean distance to the nearest foreground pixel (inf when there is none)."""
    if not mask.any():
        return np.full(mask.shape, np.inf)
    return ndimage.distance_transform_edt(~mask)


def tolerant_counts(pred: MaskLike, gt: MaskLike, tol: float = DEFAULT_TOL) -> dict[str, int]:
    """
    Confusion counts with a distance tolerance around the centerlines.

    TP: prediction pixels within `tol` of gt. FP: the remaining prediction pixels.
    FN: gt pixels with no prediction pixel within `tol`. TN: everything else.
    """
    p, g = _pair(pred, gt)
    near_gt = _distance_to(g) <= tol
    near_pred = _distance_to(p) <= tol
    tp = int((p & near_gt).sum())
    fp = int(p.sum()) - tp
    fn = int((g & ~near_pred).sum())
    return {"tp": tp, "fp": fp, "fn": fn, "tn": p.size - tp - fp - fn}


def auc(prob: MaskLike, gt: MaskLike, tol: float | None = None) -> float | None:
    """
    ROC AUC of probabilities against gt labels.

    With `tol`, positives are gt pixels and negatives are pixels farther than
    `tol` from gt; pixels in between are left out. None when only one class
    remains.
    """
    values = prob.values if isinstance(prob, Raster) else np.asarray(prob)
    g = _bool(gt)
    if values.shape != g.shape:
        raise ShapeMismatchError(
            f"probability map is {values.shape} but ground truth is {g.shape}"
        )
    if tol is None:
        keep = np.ones(g.shape, dtype=bool)
    else:
        keep = g | (_distance_to(g) > tol)
    labels = g[keep]
    if labels.all() or not labels.any():
        logger.debug("AUC skipped: only one class present")
        return None
    return float(roc_auc_score(labels.astype(np.uint8), values[keep].astype(np.float64)))


def tolerant_centerline_scores(
    pred: MaskLike,
    gt: MaskLike,
    tol: float = DEFAULT_TOL,
    prob: MaskLike | None = None,
) -> tuple[float, float, float | None]:
    """
    Relaxed Dice and accuracy for centerlines, plus AUC when a probability map is given.

    Returns:
        tuple: (dice, acc, auc or None)
    """
    counts = tolerant_counts(pred, gt, tol)
    tp, fp, fn, tn = counts["tp"], counts["fp"], counts["fn"], counts["tn"]
    denominator = 2 * tp + fp + fn
    relaxed_dice = 1.0 if denominator == 0 else 2.0 * tp / denominator
    relaxed_acc = (tp + tn) / (tp + fp + fn + tn)
    relaxed_auc = auc(prob, gt, tol) if prob is not None else None
    return relaxed_dice, relaxed_acc, relaxed_auc


def evaluate(
    pred: MaskLike,
    gt: MaskLike,
    task: str = "segmentation",
    prob: MaskLike | None = None,
    tol: float = DEFAULT_TOL,
    patch: int = DEFAULT_PATCH,
) -> MetricsReport:
    """
    Full metric report for one (prediction, ground truth) pair.

    The centerline task scores Dice/ACC/AUC with the distance tolerance; the
    segmentation task scores them pixelwise. AUC needs `prob`.
    """
    if task == "centerline":
        d, a, area = tolerant_centerline_scores(pred, gt, tol, prob)
    elif task == "segmentation":
        d, a = dice(pred, gt), acc(pred, gt)
        area = auc(prob, gt) if prob is not None else None
    else:
        raise ValueError(f"Unknown task: {task}. Supported tasks: centerline, segmentation")

    beta0_err, beta1_err, chi_err = topo_errors(pred, gt, patch)
    return MetricsReport(
        task=task,
        dice=d,
        cl_dice=cl_dice(pred, gt),
        acc=a,
        auc=area,
        ari=ari(pred, gt),
        voi=voi(pred, gt),
        beta0_err=beta0_err,
        beta1_err=beta1_err,
        chi_err=chi_err,
    )
