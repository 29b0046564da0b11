"""decipher_fst: weighted finite-state machinery and an unsupervised
phone-to-grapheme decipherment engine."""

__version__ = "0.1.0"

from .engine import (DecipherResult, Stage, TrainingSchedule, decipher,
                     default_schedule, em_step, train)
from .fst import (Arc, ConfigError, CyclicMachineError, Lattice, Wfst,
                  arc_sort, compose, compose3, forward_backward,
                  linear_acceptor, shortest_path, trim)
from .lexical import (AlignmentModel, LexicalModel, build_edit_fst,
                      init_lexical, prune_lexical, smooth)
from .lm_fst import GraphemeLexicon, build_lexicon_fst, lm_to_fst
from .metrics import ErrorReport, error_rate, oracle_error_rate
from .ngram import NGramLm, perplexity, train_char_lm, train_word_lm
from .semirings import LOG, TROPICAL
from .symbols import EPS, SymbolTable
from .synth import (ChannelNoise, PronunciationTable, gen_cipher,
                    select_shortest)

__all__ = [
    "AlignmentModel", "Arc", "ChannelNoise", "ConfigError",
    "CyclicMachineError", "DecipherResult", "EPS", "ErrorReport",
    "GraphemeLexicon", "LOG", "Lattice", "LexicalModel", "NGramLm",
    "PronunciationTable", "Stage", "SymbolTable", "TROPICAL",
    "TrainingSchedule", "Wfst", "arc_sort", "build_edit_fst",
    "build_lexicon_fst", "compose", "compose3", "decipher",
    "default_schedule", "em_step", "error_rate", "forward_backward",
    "gen_cipher", "init_lexical", "linear_acceptor", "lm_to_fst",
    "oracle_error_rate", "perplexity", "prune_lexical", "select_shortest",
    "shortest_path", "smooth", "train", "train_char_lm", "train_word_lm",
    "trim",
]
