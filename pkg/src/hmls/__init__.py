"""Homogeneous-MLS anisotropic mesh filtering."""

__version__ = "0.1.0"

from .filtering import FilterParams, FilterScales, filter_mesh, filter_vertex, taubin_filter
from .mesh import TriMesh, average_edge_length, build_adjacency, load_mesh, save_mesh
from .metrics import NoiseSpec, add_noise, displacement_report, mean_curvature, signed_distance_map
from .normals import face_normals, vertex_normals
from .spatial import build_index, gather_neighbors

__all__ = [
    "FilterParams",
    "FilterScales",
    "NoiseSpec",
    "TriMesh",
    "add_noise",
    "average_edge_length",
    "build_adjacency",
    "build_index",
    "displacement_report",
    "face_normals",
    "filter_mesh",
    "filter_vertex",
    "gather_neighbors",
    "load_mesh",
    "mean_curvature",
    "save_mesh",
    "signed_distance_map",
    "taubin_filter",
    "vertex_normals",
]
