#include <stdexcept>

#include "radfid/features.hpp"

namespace radfid {

double FeatureVector::at(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return values[i];
  throw ValidationError("unknown feature id: " + std::string(id));
}

const std::vector<std::string>& feature_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    out.reserve(kFeatureCount);
    for (const auto* family :
         {&local_intensity_ids(), &intensity_stats_ids(), &intensity_histogram_ids(),
          &ivh_ids(), &glcm_ids(), &glrlm_ids(), &glszm_ids(), &gldzm_ids(),
          &ngtdm_ids(), &ngldm_ids()})
      out.insert(out.end(), family->begin(), family->end());
    if (out.size() != kFeatureCount)
      throw std::logic_error("feature registry size drifted");
    return out;
  }();
  return ids;
}

FeatureVector extract_all(const Volume& v, const Mask& m, int n_bins) {
  const Roi roi = build_roi(v, m);
  const DiscretizedRoi droi = discretize_fbn(roi, n_bins);

  FeatureVector fv;
  fv.ids = feature_ids();
  fv.values.reserve(kFeatureCount);
  const auto append = [&](const std::vector<double>& vals) {
    fv.values.insert(fv.values.end(), vals.begin(), vals.end());
  };
  append(local_intensity_features(roi));
  append(intensity_stats_features(roi));
  append(intensity_histogram_features(droi));
  append(ivh_features(droi));
  append(cooccurrence_features(droi));
  append(runlength_features(droi));
  append(zone_features(droi, ZoneMetric::size));
  append(zone_features(droi, ZoneMetric::distance));
  append(ngtdm_features(droi));
  append(ngldm_features(droi));
  if (fv.values.size() != fv.ids.size())
    throw std::logic_error("feature vector size mismatch");
  return fv;
}

}  // namespace radfid
