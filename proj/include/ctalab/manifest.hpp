#pragma once

#include <filesystem>

#include "ctalab/table.hpp"

namespace ctalab {

// Corpus manifest: line-oriented, tab-separated records.
//
//   ctalab-manifest <version>
//   fingerprint     <hex>              (optional)
//   label           <label>            (zero or more; declares the space)
//   column          <split> <table-path> <column-index> <label>
//
// Table paths are relative to the manifest. When no `label` records are
// present the space is inferred as the union of column labels in first
// appearance order. Empty cells are dropped from each referenced column;
// a column left empty is rejected.
CorpusSplit load_labeled_corpus(const std::filesystem::path& manifest_path);

// Writes manifest plus CSV table files under `dir`. Re-loading the result
// yields an equal CorpusSplit.
void save_corpus(const CorpusSplit& corpus, const std::filesystem::path& dir,
                 const std::string& manifest_name = "corpus.manifest");

}  // namespace ctalab
