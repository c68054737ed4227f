"""
Reward Function Training and F1 Evaluation

Supervised training of a reward model on balanced batches of (state, goal,
label) triplets, jointly through the language model, the attention caster,
the classifier and (unless frozen) the OR network. F1 is computed per goal
and averaged over goals.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from ..language.grammar import Goal
from ..neural.losses import binary_cross_entropy
from ..neural.optim import Adam
from .architectures import RewardModel
from .dataset import RewardDataset
from .or_network import THRESHOLD, ORNetwork, pretrain_or

logger = logging.getLogger(__name__)


def f1_score(tp: int, fp: int, fn: int) -> float:
    """2TP / (2TP + FP + FN); 0 when the denominator is 0."""
    denominator = 2 * tp + fp + fn
    return 2.0 * tp / denominator if denominator else 0.0


def predict_labels(model: RewardModel, states: np.ndarray, goals: Sequence[Goal],
                   chunk: int = 2048) -> np.ndarray:
    """(M, G) boolean predictions of the model, thresholded at 0.5."""
    states = np.asarray(states)
    out = np.zeros((states.shape[0], len(goals)), dtype=bool)
    for k, goal in enumerate(goals):
        for start in range(0, states.shape[0], chunk):
            block = states[start:start + chunk]
            prob = model.predict(block, [goal.tokens] * block.shape[0])
            out[start:start + chunk, k] = prob > THRESHOLD
    return out


@dataclass
class F1Result:
    per_goal: pd.DataFrame

    @property
    def mean(self) -> float:
        return float(self.per_goal["f1"].mean()) if len(self.per_goal) else 0.0

    def mean_by_split(self) -> Dict[str, float]:
        return {split: float(group["f1"].mean()) for split, group in self.per_goal.groupby("split")}


def f1_table(predictions: np.ndarray, labels: np.ndarray, goals: Sequence[Goal]) -> pd.DataFrame:
    """Per-goal confusion counts and F1; goals with no positives at all are flagged degenerate."""
    tp = np.sum(predictions & labels, axis=0)
    fp = np.sum(predictions & ~labels, axis=0)
    fn = np.sum(~predictions & labels, axis=0)
    rows = []
    for k, goal in enumerate(goals):
        rows.append({
            "goal": goal.text,
            "split": goal.split,
            "gen_type": goal.gen_type,
            "pairwise": goal.is_pairwise,
            "tp": int(tp[k]), "fp": int(fp[k]), "fn": int(fn[k]),
            "f1": f1_score(int(tp[k]), int(fp[k]), int(fn[k])),
            "degenerate": bool(2 * tp[k] + fp[k] + fn[k] == 0),
            "n_samples": int(labels.shape[0]),
        })
    return pd.DataFrame(rows)


def predict_f1(model: RewardModel, dataset: RewardDataset,
               goals: Optional[Sequence[Goal]] = None) -> F1Result:
    """
    Per-goal F1 of the model against the dataset labels, macro-averaged.

    A goal with no positive label and no positive prediction scores 0 and is
    flagged `degenerate`.
    """
    if len(dataset) == 0:
        raise ValueError("cannot compute F1 on an empty labelled set")
    if goals is not None:
        dataset = dataset.subset_goals(goals)
    predictions = predict_labels(model, dataset.states, dataset.goals)
    table = f1_table(predictions, dataset.labels, dataset.goals)
    flagged = int(table["degenerate"].sum())
    if flagged:
        logger.warning(f"F1 undefined for {flagged} goals (no positives predicted or labelled); scored 0")
    return F1Result(per_goal=table)


@dataclass
class TrainingResult:
    curves: List[Dict[str, Any]] = field(default_factory=list)
    final: Dict[str, Dict[str, float]] = field(default_factory=dict)


def reward_training_step(model: RewardModel, optimizer: Adam, states: np.ndarray,
                         tokens: Sequence, labels: np.ndarray) -> float:
    prob, tape = model.forward(states, tokens)
    loss, dprob = binary_cross_entropy(prob, labels.astype(prob.dtype))
    _, grads = model.backward(tape, dprob)
    optimizer.step(grads, loss)
    return loss


def train_reward(model: RewardModel, train_set: RewardDataset, config: Mapping[str, Any],
                 rng: np.random.Generator, eval_sets: Optional[Mapping[str, RewardDataset]] = None,
                 optimizer: Optional[Adam] = None) -> TrainingResult:
    """
    Minimise binary cross-entropy on balanced batches of the training set.

    Args:
        model: Reward model to train in place
        train_set: Final-state dataset
        config: Run settings (epochs, batches_per_epoch, reward_batch_size, reward_lr)
        rng: Batch sampling stream
        eval_sets: Named labelled sets evaluated with predict_f1 after every epoch

    Returns:
        TrainingResult with per-epoch loss and F1 records
    """
    if len(train_set.degenerate_goals()) == len(train_set.goals):
        logger.warning("Every goal of the training set is single-class; the fit will be degenerate")
    optimizer = optimizer or Adam(model, lr=config["reward_lr"])
    eval_sets = eval_sets or {}
    result = TrainingResult()

    for epoch in range(1, config["epochs"] + 1):
        losses = []
        for _ in range(config["batches_per_epoch"]):
            states, goal_index, labels = train_set.balanced_batch(rng, config["reward_batch_size"])
            tokens = [train_set.goals[k].tokens for k in goal_index]
            losses.append(reward_training_step(model, optimizer, states, tokens, labels))
        mean_loss = float(np.mean(losses))
        result.curves.append({"epoch": epoch, "metric": "loss", "split": "train", "value": mean_loss})

        summary = []
        for name, dataset in eval_sets.items():
            by_split = predict_f1(model, dataset).mean_by_split()
            for split, value in by_split.items():
                result.curves.append({"epoch": epoch, "metric": f"f1_{name}", "split": split, "value": value})
                summary.append(f"{name}/{split} F1 {value:.3f}")
            result.final[name] = by_split
        logger.info(f"Epoch {epoch}/{config['epochs']}: loss {mean_loss:.4f} " + " ".join(summary))
    return result


def pretrained_or(config: Mapping[str, Any], rng: np.random.Generator, dtype=np.float32) -> ORNetwork:
    """Build and pretrain an OR network sized by the run settings."""
    net = ORNetwork(config["or_width"], config["or_hidden"], config["or_input_gain"], rng=rng, dtype=dtype)
    pretrain_or(net, rng, steps=config["or_pretrain_steps"], batch_size=config["or_batch_size"],
                lr=config["or_lr"], accuracy_threshold=config["or_accuracy_threshold"])
    return net


def install_or(model: RewardModel, net: ORNetwork) -> None:
    """Copy pretrained OR weights into a modular reward model."""
    if not isinstance(getattr(model, "aggregator", None), ORNetwork):
        logger.info(f"{model.variant} reward model has no OR network; pretrained OR not installed")
        return
    model.aggregator.load_parameters(net.named_parameters())
