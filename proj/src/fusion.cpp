#include "mixsearch/fusion.hpp"

#include <string>

#include "mixsearch/error.hpp"
#include "mixsearch/kernels.hpp"

namespace mixsearch::fusion {

namespace {

const Embedding& require_part(const Document& doc, Modality m) {
  const Embedding* e = doc.part(m);
  if (e == nullptr) {
    throw Error(ErrorCode::MissingPart, "document '" + doc.id + "' has no " + std::string(modality_name(m)) + " part");
  }
  return *e;
}

Embedding blend(const Embedding& a, const Embedding& b, double alpha) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "fusion parts differ in dimension");
  Embedding out(a.dim());
  kernels::active().blend(out.data(), a.data(), b.data(), alpha, 1.0 - alpha, a.dim());
  return out;
}

}  // namespace

void FusionSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha " + std::to_string(alpha) + " outside [0, 1]");
  }
  if (text_modality == other_modality) {
    throw Error(ErrorCode::InvalidArgument, "fusion modalities must differ");
  }
}

Embedding fuse_raw(const Document& doc, const FusionSpec& spec) {
  spec.validate();
  return blend(require_part(doc, spec.text_modality), require_part(doc, spec.other_modality), spec.alpha);
}

Embedding fuse_calibrated(const Document& doc, const FusionSpec& spec, const calibration::CalibrationMeans& means) {
  if (spec.renormalize_centered) {
    spec.validate();
    const auto centered = [&](Modality m) {
      return calibration::normalize(calibration::remove_gap(require_part(doc, m), calibration::part_key(m), means))
          .embedding;
    };
    return blend(centered(spec.text_modality), centered(spec.other_modality), spec.alpha);
  }
  const Embedding fused = fuse_raw(doc, spec);
  const Embedding& mean_text = means.at(calibration::part_key(spec.text_modality));
  const Embedding& mean_other = means.at(calibration::part_key(spec.other_modality));
  const Embedding offset = blend(mean_text, mean_other, spec.alpha);
  if (offset.dim() != fused.dim()) throw Error(ErrorCode::DimensionMismatch, "means differ from document dimension");
  Embedding out(fused.dim());
  kernels::active().subtract(out.data(), fused.data(), offset.data(), fused.dim());
  return out;
}

}  // namespace mixsearch::fusion
