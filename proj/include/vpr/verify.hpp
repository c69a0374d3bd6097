#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "vpr/gateway.hpp"
#include "vpr/types.hpp"

namespace vpr {

struct ChunkerConfig {
    // Provisional sentences shorter than this many words merge forward.
    int min_words_per_chunk = 8;
};

// Splits on sentence terminators (., !, ? plus trailing closing quotes or
// brackets), merges short sentences forward and a short trailing sentence
// backward. Chunks are trimmed literal substrings of the input, in order.
// Throws EmptyInputError on blank input.
std::vector<Chunk> chunk(std::string_view prompt_text, const ChunkerConfig& config = {});

// u.v / (|u||v|), clamped to [-1, 1]. Throws DimensionMismatchError and
// ZeroVectorError.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

struct SimilarityMatrix {
    std::size_t n_atoms = 0;
    std::size_t n_chunks = 0;
    std::vector<double> values;  // row-major, n_atoms x n_chunks

    double at(std::size_t i, std::size_t j) const { return values[i * n_chunks + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * n_chunks + j]; }
    std::vector<std::vector<double>> rows() const;
};

SimilarityMatrix similarity_matrix(const std::vector<EmbeddingVector>& atom_vectors,
                                   const std::vector<EmbeddingVector>& chunk_vectors);

// Embeds atoms and chunks (one batched call each) and pairs every atom with
// its maximum-similarity chunk; ties break toward the smallest chunk index.
std::vector<EvidencePair> match_atoms(const std::vector<Atom>& atoms,
                                      const std::vector<Chunk>& chunks,
                                      EmbeddingBackend& backend,
                                      const BackendConfig& config,
                                      SimilarityMatrix* matrix_out = nullptr);

// Counts labels; an empty judgment list yields the flagged degenerate metrics
// (coverage 1, contradiction 0).
VerificationMetrics compute_metrics(const std::vector<EntailmentJudgment>& judgments);

// Strict acceptance on exact counts: every atom ET and none CT.
bool check_acceptance(const VerificationMetrics& metrics);

}  // namespace vpr
