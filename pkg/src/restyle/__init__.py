"""Few-shot text restyling toolkit.

An embedding-conditioned sequence-to-sequence model reconstructs text from
style-neutral paraphrases; candidate generation with metric reranking and
filtering builds a synthetic pair dataset; self-distillation removes the
paraphrase step from inference. Includes interpolation-controlled transfer,
an evaluation harness, a CLI, and a local HTTP service.
"""

from .config import PipelineConfig as PipelineConfig
from .corpus import (
    AuthorCorpus as AuthorCorpus,
    TextRecord as TextRecord,
    load_corpus as load_corpus,
    sample_author_pairs as sample_author_pairs,
    sample_author_texts as sample_author_texts,
    save_corpus as save_corpus,
    split_by_author as split_by_author,
)
from .metrics import (
    FluencyModel as FluencyModel,
    ScoreVector as ScoreVector,
    away as away,
    joint_eval as joint_eval,
    rerank_score as rerank_score,
    sim as sim,
    style_joint as style_joint,
    towards as towards,
)
from .model import (
    BpeTokenizer as BpeTokenizer,
    CharTokenizer as CharTokenizer,
    Checkpoint as Checkpoint,
    ModelConfig as ModelConfig,
    TrainSettings as TrainSettings,
    fine_tune_distill as fine_tune_distill,
    generate as generate,
    greedy_decode as greedy_decode,
    train_reconstruction as train_reconstruction,
)
from .neutralizer import (
    ParaphraseSettings as ParaphraseSettings,
    neutrality_score as neutrality_score,
    normalize_text as normalize_text,
    paraphrase as paraphrase,
)
from .pipeline import (
    FilterSettings as FilterSettings,
    GenSettings as GenSettings,
    TransferCandidate as TransferCandidate,
    TransferPair as TransferPair,
    TransferSystem as TransferSystem,
    build_recon_dataset as build_recon_dataset,
    filter_candidates as filter_candidates,
    generate_candidates as generate_candidates,
    generate_pair_dataset as generate_pair_dataset,
    select_best as select_best,
    self_distill as self_distill,
    transfer as transfer,
)
from .style_space import (
    FeatureStyleEmbedder as FeatureStyleEmbedder,
    StyleEmbedding as StyleEmbedding,
    cosine as cosine,
    default_style_embedder as default_style_embedder,
    embed as embed,
    heldout_style_embedder as heldout_style_embedder,
    interpolate as interpolate,
    mean_pool as mean_pool,
)
