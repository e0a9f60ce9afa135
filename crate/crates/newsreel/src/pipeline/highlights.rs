use newsreel_core::highlight::{
    assign_highlights, clamped_cosine, HighlightConfig, Lexical, Similarity, SimilarityBackend,
};
use newsreel_core::{HighlightSet, Script};

use crate::error::{Error, Result};
use crate::providers::{EmbeddingCache, Providers};

/// Cosine of provider embeddings, clamped to `[0, 1]`.
pub struct EmbeddingSimilarity<'p> {
    providers: &'p Providers,
    cache: EmbeddingCache,
}

impl<'p> EmbeddingSimilarity<'p> {
    pub fn new(providers: &'p Providers) -> Self {
        EmbeddingSimilarity { providers, cache: EmbeddingCache::default() }
    }
}

impl Similarity for EmbeddingSimilarity<'_> {
    type Error = Error;

    fn similarity(&mut self, a: &str, b: &str) -> Result<f64> {
        let va = self.cache.get(self.providers, a)?;
        let vb = self.cache.get(self.providers, b)?;
        Ok(clamped_cosine(&va, &vb)?)
    }
}

/// The configured backend, or the lexical fallback when `auto` is asked for
/// and no embeddings can be served.
pub fn resolve_backend(requested: Option<SimilarityBackend>, providers: &Providers) -> SimilarityBackend {
    match requested {
        Some(b) => b,
        None if providers.embeddings_available() => SimilarityBackend::EmbeddingCosine,
        None => SimilarityBackend::LexicalFallback,
    }
}

pub fn highlight_script(
    script: &Script,
    info_points: &[String],
    config: &HighlightConfig,
    providers: &Providers,
) -> Result<HighlightSet> {
    config.validate()?;
    match config.backend {
        SimilarityBackend::EmbeddingCosine => {
            assign_highlights(script, info_points, config.threshold, &mut EmbeddingSimilarity::new(providers))
        }
        SimilarityBackend::LexicalFallback => {
            Ok(assign_highlights(script, info_points, config.threshold, &mut Lexical)?)
        }
    }
}
