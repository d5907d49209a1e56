"""labelkit: unsupervised label-space induction and assignment for short abstracts.

The pipeline: ingest and preprocess a corpus, extract and enrich keywords,
embed keyword-metadata concatenations, cluster them into a named label space,
measure that space (redundancy, coverage) and predict labels per document by
thresholding the coverage matrix.
"""

from labelkit.corpus import (
    Corpus,
    Document,
    SplitSpec,
    default_stopwords,
    ingest,
    load_stopwords,
    preprocess_text,
    split,
)
from labelkit.providers import (
    EMBEDDING_DIM,
    EmbeddingCache,
    EmbeddingClient,
    MetadataClient,
    MetadataRecord,
    MockEmbedder,
    MockMetadataGenerator,
    ProviderConfig,
    Providers,
    concat_for_embedding,
    make_providers,
    mock_embedding,
)
from labelkit.extraction import (
    ExtractionParams,
    KeywordSet,
    extract_candidates,
    extract_keywords,
    mmr_select,
    rank_candidates,
)
from labelkit.labelspace import (
    ClusterParams,
    LabelSpace,
    generate_label_space,
    kmeans,
    name_clusters,
)
from labelkit.spacemetrics import (
    CoverageMatrix,
    CoverageReport,
    RedundancyReport,
    coverage,
    coverage_matrix,
    coverage_of_corpus,
    document_matrices,
    redundancy,
)
from labelkit.assigner import (
    AssignmentParams,
    Prediction,
    assign,
    assign_corpus,
    retained_count,
)
from labelkit.evaluation import (
    Annotation,
    AnnotationStore,
    EvalReport,
    UNLABELED,
    ablate_metadata,
    annotate,
    evaluate,
    sweep_k,
    sweep_keywords,
    sweep_threshold,
)

__version__ = "0.1.0"
