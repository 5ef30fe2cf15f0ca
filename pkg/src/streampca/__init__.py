"""Streaming memory-limited PCA with a projection-based acceleration scheme.

Single-pass top-k eigenbasis estimation from block streams (block power,
block Oja, momentum block power), optionally wrapped in a per-component
pullback that keeps tiny-block updates convergent, plus the batch-PCA
reference, spiked/harmonic data generators and a seeded experiment harness.
"""

from ._backend import BACKEND, available_backends, use_backend
from .errors import (DegenerateSpectrum, DimensionMismatch, InsufficientSamples,
                     InvalidDims, NearZeroVector, ParseError, RaggedRows,
                     RankDeficient, SchemaMismatch, StreamPCAError, TrialError,
                     ZeroEnergy)
from .estimators import (BLOCK_OJA, BLOCK_POWER, METHODS,
                         MOMENTUM_BLOCK_POWER, LearningRateSchedule,
                         StreamingEstimator, accelerate, alignment_objective,
                         block_power_base, init_basis,
                         momentum_block_power_base, oja_block_base)
from .evaluation import (CovarianceSpec, EigenPair, accuracy, batch_pca,
                         convergence, eigengap, log_convergence,
                         top_eigenpairs)
from .experiment import (ExperimentConfig, MethodEntry, SuiteResult,
                         TrialRecord, build_dataset, emit_plotdata, run_suite,
                         run_trial)
from .linalg import (DataBlock, gram_apply, is_orthonormal, normalize,
                     orthonormalize, projection_energy, zero_threshold)
from .sources import (HarmonicModel, SpikedModel, TrajectorySource, blocks,
                      center_stream, harmonic_matrix, harmonic_sample,
                      iter_trajectory_rows, load_trajectory,
                      make_harmonic_model, make_spiked_model, spiked_matrix,
                      spiked_sample, write_trajectory)

__version__ = "0.1.0"
