"""Linear-classifier evaluation under leave-one-out protocols.

Features are evaluated with one-vs-rest linear hinge-loss SVMs (C = 10000
by default) under leave-one-subject-out (LOSO) or leave-one-video-out
(LOVO) cross-validation.  Two accuracy averages are reported: micro (over
all evaluated samples) and macro (unweighted mean of per-subject
accuracies).  Precision/recall/F1 are reported micro-averaged,
class-macro-averaged and subject-macro-averaged, labeled distinctly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.svm import LinearSVC

DEFAULT_SVM_C = 10000.0


@dataclass
class FeatureVector:
    """Flat real-valued descriptor of one video sample."""

    values: np.ndarray
    video_id: str
    subject_id: str
    label: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if not np.isfinite(self.values).all():
            raise ValueError(f"feature vector {self.video_id!r} has non-finite values")

    def __len__(self) -> int:
        return self.values.size


def concat_features(osf: FeatureVector, osw: FeatureVector) -> FeatureVector:
    """Join the two descriptors of one video: OSW bins first, then OSF grid."""
    if osf.video_id != osw.video_id:
        raise ValueError(
            f"cannot concatenate features of different videos: "
            f"{osf.video_id!r} vs {osw.video_id!r}"
        )
    return FeatureVector(
        values=np.concatenate([osw.values, osf.values]),
        video_id=osf.video_id,
        subject_id=osf.subject_id,
        label=osf.label,
    )


@dataclass
class Prediction:
    video_id: str
    subject_id: str
    fold: str
    true_label: str
    predicted_label: str


@dataclass
class EvalReport:
    """Cross-validation outcome: predictions, confusion matrix, metrics."""

    protocol: str
    classes: list
    predictions: list
    confusion: np.ndarray
    micro: dict = field(default_factory=dict)
    macro_by_class: dict = field(default_factory=dict)
    macro_by_subject: dict = field(default_factory=dict)
    per_class: dict = field(default_factory=dict)

    @property
    def micro_accuracy(self) -> float:
        return self.micro["accuracy"]

    @property
    def macro_accuracy(self) -> float:
        return self.macro_by_subject["accuracy"]

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "classes": list(self.classes),
            "n_samples": len(self.predictions),
            "confusion_matrix": self.confusion.astype(int).tolist(),
            "micro": self.micro,
            "macro_by_class": self.macro_by_class,
            "macro_by_subject": self.macro_by_subject,
            "per_class": self.per_class,
            "predictions": [
                {
                    "video_id": p.video_id,
                    "subject_id": p.subject_id,
                    "fold": p.fold,
                    "true_label": p.true_label,
                    "predicted_label": p.predicted_label,
                }
                for p in self.predictions
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def save_predictions_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["video_id", "subject_id", "fold", "true_label", "predicted_label"])
            for p in self.predictions:
                writer.writerow([p.video_id, p.subject_id, p.fold, p.true_label, p.predicted_label])

    def save_confusion_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["true\\predicted"] + list(self.classes))
            for cls, row in zip(self.classes, self.confusion.astype(int).tolist()):
                writer.writerow([cls] + row)


def confusion_matrix(true_labels, predicted_labels, classes) -> np.ndarray:
    """Class-by-class count matrix; rows are true labels, columns predictions."""
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        cm[index[t], index[p]] += 1
    return cm


def _per_class_metrics(cm: np.ndarray):
    tp = np.diag(cm).astype(np.float64)
    col = cm.sum(axis=0).astype(np.float64)
    row = cm.sum(axis=1).astype(np.float64)
    precision = np.divide(tp, col, out=np.zeros_like(tp), where=col > 0)
    recall = np.divide(tp, row, out=np.zeros_like(tp), where=row > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return precision, recall, f1


def _micro_metrics(cm: np.ndarray) -> dict:
    tp = float(np.trace(cm))
    total = float(cm.sum())
    fp = float(cm.sum() - np.trace(cm))
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / total if total > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return {
        "accuracy": tp / total if total > 0 else 0.0,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }


def report_from_predictions(predictions, protocol: str, classes=None) -> EvalReport:
    """Aggregate per-fold predictions into the full metric report.

    Subject-macro metrics average each subject's own numbers with equal
    subject weight; class-macro metrics average the per-class numbers of
    the pooled confusion matrix.
    """
    if classes is None:
        classes = sorted({p.true_label for p in predictions})
    classes = list(classes)
    cm = confusion_matrix(
        [p.true_label for p in predictions],
        [p.predicted_label for p in predictions],
        classes,
    )

    precision, recall, f1 = _per_class_metrics(cm)
    per_class = {
        cls: {"precision": float(precision[i]), "recall": float(recall[i]), "f1": float(f1[i])}
        for i, cls in enumerate(classes)
    }
    macro_by_class = {
        "precision": float(precision.mean()),
        "recall": float(recall.mean()),
        "f1": float(f1.mean()),
    }

    subjects = sorted({p.subject_id for p in predictions})
    sub_acc, sub_prec, sub_rec, sub_f1 = [], [], [], []
    for subject in subjects:
        own = [p for p in predictions if p.subject_id == subject]
        sub_cm = confusion_matrix(
            [p.true_label for p in own], [p.predicted_label for p in own], classes
        )
        sub_acc.append(np.trace(sub_cm) / sub_cm.sum())
        s_prec, s_rec, s_f1 = _per_class_metrics(sub_cm)
        present = sub_cm.sum(axis=1) > 0
        sub_prec.append(s_prec[present].mean())
        sub_rec.append(s_rec[present].mean())
        sub_f1.append(s_f1[present].mean())
    macro_by_subject = {
        "accuracy": float(np.mean(sub_acc)),
        "precision": float(np.mean(sub_prec)),
        "recall": float(np.mean(sub_rec)),
        "f1": float(np.mean(sub_f1)),
    }

    return EvalReport(
        protocol=protocol,
        classes=classes,
        predictions=list(predictions),
        confusion=cm,
        micro=_micro_metrics(cm),
        macro_by_class=macro_by_class,
        macro_by_subject=macro_by_subject,
        per_class=per_class,
    )


def train_linear_svm(train: list, c: float = DEFAULT_SVM_C) -> LinearSVC:
    """Fit one-vs-rest linear hinge-loss SVMs on labeled feature vectors.

    Deterministic for a fixed sample order; requires at least two classes.
    """
    labels = [fv.label for fv in train]
    if len(set(labels)) < 2:
        raise ValueError("training set must contain at least two classes")
    x = np.vstack([fv.values for fv in train])
    model = LinearSVC(C=c, loss="hinge", dual=True, random_state=0, max_iter=50000)
    model.fit(x, labels)
    return model


def _check_lengths(dataset):
    lengths = {len(fv) for fv in dataset}
    if len(lengths) > 1:
        raise ValueError(f"inconsistent feature lengths in dataset: {sorted(lengths)}")


def cross_validate(
    dataset: list,
    protocol: str = "LOSO",
    c: float = DEFAULT_SVM_C,
    standardize: bool = False,
) -> EvalReport:
    """Evaluate labeled feature vectors under a leave-one-out protocol.

    LOSO holds out every subject's videos in turn, LOVO every single video.
    Each sample is predicted exactly once; train and test folds never
    overlap.  `standardize` rescales features to zero mean / unit variance
    using statistics of the training fold only.
    """
    if protocol not in ("LOSO", "LOVO"):
        raise ValueError(f"protocol must be LOSO or LOVO, got {protocol!r}")
    _check_lengths(dataset)

    if protocol == "LOSO":
        holdout_keys = sorted({fv.subject_id for fv in dataset})
        if len(holdout_keys) < 2:
            raise ValueError("LOSO needs at least 2 distinct subjects")
        group = lambda fv: fv.subject_id
    else:
        holdout_keys = sorted({fv.video_id for fv in dataset})
        if len(holdout_keys) < 2:
            raise ValueError("LOVO needs at least 2 videos")
        group = lambda fv: fv.video_id

    classes = sorted({fv.label for fv in dataset})
    predictions = []
    for key in holdout_keys:
        train = [fv for fv in dataset if group(fv) != key]
        test = [fv for fv in dataset if group(fv) == key]
        x_train = np.vstack([fv.values for fv in train])
        x_test = np.vstack([fv.values for fv in test])
        if standardize:
            mean = x_train.mean(axis=0)
            std = x_train.std(axis=0)
            std[std == 0] = 1.0
            x_train = (x_train - mean) / std
            x_test = (x_test - mean) / std
        model = LinearSVC(
            C=c, loss="hinge", dual=True, random_state=0, max_iter=50000
        )
        labels = [fv.label for fv in train]
        if len(set(labels)) < 2:
            raise ValueError(f"fold {key!r} leaves a single-class training set")
        model.fit(x_train, labels)
        predicted = model.predict(x_test)
        for fv, pred in zip(test, predicted):
            predictions.append(
                Prediction(
                    video_id=fv.video_id,
                    subject_id=fv.subject_id,
                    fold=key,
                    true_label=fv.label,
                    predicted_label=str(pred),
                )
            )

    return report_from_predictions(predictions, protocol, classes)
