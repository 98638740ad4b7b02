// Times the parallel kernels against their serial reference
// implementations and checks that both produce identical outputs.

#include <omp.h>

#include <cstdio>
#include <cstring>
#include <vector>

#include "lowmot/kernels.hpp"
#include "lowmot/random.hpp"
#include "lowmot/synth.hpp"

using namespace lowmot;

namespace {

std::vector<Embedding> random_embeddings(int count, int dim, Rng& rng) {
  std::vector<Embedding> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::vector<float> v(dim);
    for (float& x : v) x = static_cast<float>(rng.gaussian());
    out.push_back(Embedding::normalized(std::move(v)));
  }
  return out;
}

template <typename Fn>
double time_ms(Fn&& fn, int repeats) {
  const double t0 = omp_get_wtime();
  for (int i = 0; i < repeats; ++i) fn();
  return (omp_get_wtime() - t0) * 1e3 / repeats;
}

void report(const char* name, double serial_ms, double parallel_ms,
            bool equal) {
  std::printf("%-22s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   %s\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms,
              equal ? "outputs equal" : "OUTPUT MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 0;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0) threads = std::atoi(argv[i + 1]);
  }
  if (threads > 0) set_max_threads(threads);
  std::printf("threads: %d\n\n", max_threads());

  Rng rng(42);

  {  // similarity matrix, 200x200 at 128 dims
    const auto rows = random_embeddings(200, 128, rng);
    const auto cols = random_embeddings(200, 128, rng);
    SimilarityMatrix a, b;
    const double serial_ms =
        time_ms([&] { a = similarity_matrix_serial(rows, cols); }, 20);
    const double parallel_ms =
        time_ms([&] { b = similarity_matrix(rows, cols); }, 20);
    report("similarity_matrix", serial_ms, parallel_ms, a == b);
  }

  {  // batch mean-shift over a 640x480 scene with 50 targets
    ScenarioSpec spec = clone_stress_preset(7);
    spec.arena_width = 640;
    spec.arena_height = 480;
    spec.targets.clear();
    Rng trng(9);
    for (int i = 0; i < 50; ++i) {
      TargetSpec t;
      t.kind = TrajectoryKind::kLinear;
      t.width = 30;
      t.height = 40;
      t.color = {static_cast<std::uint8_t>(60 + 3 * i),
                 static_cast<std::uint8_t>(200 - 2 * i), 90};
      t.start_x = trng.uniform(30.0, 610.0);
      t.start_y = trng.uniform(30.0, 450.0);
      t.vel_x = trng.uniform(-40.0, 40.0);
      t.vel_y = trng.uniform(-30.0, 30.0);
      spec.targets.push_back(t);
    }
    const ImageFrame frame_a = render_frame(spec, 1);
    const ImageFrame frame_b = render_frame(spec, 16);

    MeanShiftParams params;
    std::vector<MeanShiftModel> models;
    std::vector<BBox> starts;
    const Synthesis synthesis = generate(spec);
    for (const GtEntry& e : synthesis.gt[0]) {
      models.push_back(init_model(frame_a, e.bbox, params.bins_per_channel));
      starts.push_back(e.bbox);
    }
    std::vector<const MeanShiftModel*> model_ptrs;
    for (const auto& m : models) model_ptrs.push_back(&m);

    std::vector<VtResult> ra, rb;
    const double serial_ms = time_ms(
        [&] { ra = track_batch_serial(model_ptrs, frame_b, starts, params); },
        10);
    const double parallel_ms = time_ms(
        [&] { rb = track_batch(model_ptrs, frame_b, starts, params); }, 10);
    bool equal = ra.size() == rb.size();
    for (std::size_t i = 0; equal && i < ra.size(); ++i) {
      equal = ra[i].bbox.left == rb[i].bbox.left &&
              ra[i].bbox.top == rb[i].bbox.top &&
              ra[i].similarity == rb[i].similarity &&
              ra[i].converged == rb[i].converged;
    }
    report("track_batch (50 models)", serial_ms, parallel_ms, equal);

    std::vector<BBox> ba, bb;
    const double bs_ms = time_ms(
        [&] { ba = backward_batch_serial(starts, frame_a, frame_b, params); },
        10);
    const double bp_ms = time_ms(
        [&] { bb = backward_batch(starts, frame_a, frame_b, params); }, 10);
    bool bequal = ba.size() == bb.size();
    for (std::size_t i = 0; bequal && i < ba.size(); ++i) {
      bequal = ba[i].left == bb[i].left && ba[i].top == bb[i].top &&
               ba[i].width == bb[i].width && ba[i].height == bb[i].height;
    }
    report("backward_batch (50)", bs_ms, bp_ms, bequal);
  }

  {  // frame rendering, 1280x720
    const ScenarioSpec spec = clone_stress_preset(3);
    ImageFrame a, b;
    const double serial_ms =
        time_ms([&] { a = render_frame_serial(spec, 90); }, 10);
    const double parallel_ms =
        time_ms([&] { b = render_frame(spec, 90); }, 10);
    report("render_frame", serial_ms, parallel_ms, a.pixels == b.pixels);
  }

  return 0;
}
