//! Prompt/caption similarity.

mod bow;
mod provider;
mod similarity;
mod stopwords;

pub use bow::{bow_cosine, term_frequencies, tokenize};
pub use provider::{
    read_captions, write_captions, CaptionLine, FileProvider, HttpProvider, ModelProvider,
    ProviderSpec, StubProvider, DEFAULT_MAX_IN_FLIGHT, STUB_CLASSES, STUB_EMBED_DIM,
};
pub use similarity::{
    caption_video, combined_similarity, combined_similarity_with, cosine_clamped, embedding_cosine,
    grouped_video_score, video_text_similarity, weighted_video_score, CaptionScore, CaptionSet,
    SimilarityReport, SimilarityWeights,
};
pub use stopwords::{is_stopword, STOPWORDS};
