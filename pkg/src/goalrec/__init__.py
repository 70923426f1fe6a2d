"""goalrec: a goal-recognition workbench over generated planning domains.

The package compares a model-based recognizer (landmark goal-completion
scoring, optionally prior-weighted) against two from-scratch learned
recognizers (gradient-boosted trees over bag-of-actions counts, and an
LSTM over action sequences) on procedurally generated benchmark families,
under the standard partial-observation evaluation protocol.
"""

from .errors import (ArityMismatchError, BrokenPrefixError, EmptyHypothesisSetError,
                     EmptyScoresError, EmptySequenceError, GoalrecError,
                     IndexOutOfVocabError, InsufficientTracesError, IoError,
                     ModelError, NodeBudgetExceededError, NotApplicableError,
                     ParseError, ScaleTooSmallError, ShapeMismatchError,
                     SingleClassDataError, TypeMismatchError, UndeclaredConstantError,
                     UnknownPredicateError, UnknownTypeError, UnreachableGoalError,
                     UnsolvableError, UnsolvableLayoutError, UnsupportedDomainError)
from .strips import (Atom, DomainSchema, Fact, GoalHypothesis, GroundAction,
                     GroundTask, ObservationTrace, ProblemSpec, State, apply,
                     format_domain, format_problem, ground, holds, parse_domain,
                     parse_problem)
from .planner import (INF, Plan, RelaxedPlanningGraph, ValidationResult, build_rpg,
                      gbfs_plan, h_add, validate)
from .landmarks import (LandmarkGraph, achieved_landmarks, dump_landmark_graph,
                        extract_landmarks, observed_facts, replay_prefix)
from .recognizer import (DEFAULT_THRESHOLD, RecognitionResult, extract_all,
                         goal_completion, recognize, recognize_trace)
from .gbt import (GbtConfig, GbtEnsemble, RegressionTree, featurize, load_gbt,
                  predict_gbt, predict_gbt_batch, predict_scores,
                  predict_scores_batch, save_gbt, train_gbt)
from .seq import (SeqHyper, SeqModel, backward, forward, gradient_check,
                  init_seq_model, learning_curve, load_seq, predict_seq, save_seq,
                  train_seq)
from .domains import (FAMILIES, GeneratorConfig, SET1_PRIORS, domain_source,
                      family_vocab, gen_blockwords, gen_buy, gen_grid,
                      gen_logistics, generate_task, instance_source)
from .harness import (DEFAULT_PLAN_NOISE, DEFAULT_RATIOS, Dataset, Episode,
                      EvalReport, EvalRow, TrainedModel, build_dataset,
                      emit_report, evaluate, learning_curve_eval, load_dataset,
                      merge_reports, parse_report, save_dataset, train_method,
                      truncate, write_report)

__version__ = "0.1.0"
