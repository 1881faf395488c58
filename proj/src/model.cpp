#include "fakespot/nn/model.hpp"

namespace fakespot::nn {

TrainedModel TrainedModel::initialise(const ModelTopology& topology, std::uint64_t seed)
{
    SeededRng rng(seed);
    TrainedModel m;
    m.topology = topology;
    m.params = init_parameters(topology, rng);
    m.provenance.seed = seed;
    return m;
}

}  // namespace fakespot::nn
