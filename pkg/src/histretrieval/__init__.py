"""Content-based image retrieval with bag-of-words histograms, nonnegative
matrix factorization and contextual similarity by graph transduction."""

from .codebook import Codebook, assign, quantize_image, train_codebook
from .config import PipelineConfig, load_config, parse_config
from .context import (baseline_cosine_scores, build_graph, contextual_scores,
                      rank, transduce)
from .errors import *  # noqa: F401,F403
from .evaluation import (EvalReport, FoldAssignment, RocCurve,
                         generate_synthetic_corpus, make_folds, roc_curve,
                         run_cross_validation)
from .factorization import Factorization, nmf_factorize, nmf_project, reconstruction_error
from .ingest import (ImageRecord, LabeledDataset, extract_patches, load_image,
                     scan_dataset)
from .model import RetrievalModel, load_model, save_model

__version__ = "0.1.0"
