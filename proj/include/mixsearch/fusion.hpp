#pragma once

#include "mixsearch/calibration.hpp"
#include "mixsearch/core.hpp"

namespace mixsearch::fusion {

// alpha weights the text-side modality, 1 - alpha the other one.
struct FusionSpec {
  double alpha = 0.5;
  Modality text_modality = Modality::Text;
  Modality other_modality = Modality::Image;
  // Ablation: L2-normalize each centered part before interpolating.
  bool renormalize_centered = false;

  // Throws Error(InvalidArgument) unless 0 <= alpha <= 1 and the two
  // modalities differ.
  void validate() const;
};

// alpha * text + (1 - alpha) * other. Throws MissingPart.
Embedding fuse_raw(const Document& doc, const FusionSpec& spec);

// fuse_raw(doc) - (alpha * mean_text + (1 - alpha) * mean_other), using the
// document-part means. With renormalize_centered: alpha * unit(text - mean_text)
// + (1 - alpha) * unit(other - mean_other). Throws MissingPart or MissingMean.
Embedding fuse_calibrated(const Document& doc, const FusionSpec& spec,
                          const calibration::CalibrationMeans& means);

}  // namespace mixsearch::fusion
