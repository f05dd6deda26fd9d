"""
EDMD data matrices, compressions and the QR change of basis.
"""

from grassmann_edmd.edmd.compression import (
    RANK_RTOL,
    CompressionMatrix,
    bilinear_compression,
    bilinear_matrices_from_data,
    change_of_basis_compression,
    full_edmd,
    koopman_eigenvalues,
    numerical_rank,
    subspace_bilinear_compression,
)
from grassmann_edmd.edmd.data import DataMatrices, build_data_matrices
from grassmann_edmd.edmd.transform import (
    TransformedModel,
    coordinate_krylov_basis,
    extend_basis,
    qr_transform,
    reduced_coordinate_matrix,
    subspace_compression,
)

__all__ = [
    "DataMatrices",
    "build_data_matrices",
    "CompressionMatrix",
    "RANK_RTOL",
    "numerical_rank",
    "full_edmd",
    "bilinear_matrices_from_data",
    "bilinear_compression",
    "subspace_bilinear_compression",
    "change_of_basis_compression",
    "koopman_eigenvalues",
    "TransformedModel",
    "qr_transform",
    "extend_basis",
    "coordinate_krylov_basis",
    "subspace_compression",
    "reduced_coordinate_matrix",
]
