#include "meaad/mlp.hpp"

namespace meaad {

template class Mlp<float>;
template class Mlp<double>;
template SgdResult<float> train_mlp<float>(const Mlp<float>::Matrix&, const Mlp<float>::RowVector&,
                                           const SgdConfig&);
template SgdResult<double> train_mlp<double>(const Mlp<double>::Matrix&, const Mlp<double>::RowVector&,
                                             const SgdConfig&);

}  // namespace meaad
