"""Tetrahedral neural impostors: training, rendering, and editing."""

try:
    from . import _nimp as _c  # installed layout: extension inside the package
except ImportError:
    import _nimp as _c  # build-tree layout: extension beside the package

Camera = _c.Camera
Dataset = _c.Dataset
DataError = _c.DataError
Image = _c.Image
Model = _c.Model
NumericError = _c.NumericError
TetMesh = _c.TetMesh
ball_mesh = _c.ball_mesh
grid_mesh = _c.grid_mesh
load_cameras = _c.load_cameras
load_dataset = _c.load_dataset
load_image = _c.load_image
load_mesh = _c.load_mesh
load_model = _c.load_model
look_at = _c.look_at
make_model = _c.make_model
mse = _c.mse
psnr = _c.psnr
retrain_local = _c.retrain_local
save_cameras = _c.save_cameras
split_tet = _c.split_tet
toy_dataset = _c.toy_dataset
train = _c.train

__all__ = [
    "Camera",
    "Dataset",
    "DataError",
    "Image",
    "Model",
    "NumericError",
    "TetMesh",
    "ball_mesh",
    "grid_mesh",
    "load_cameras",
    "load_dataset",
    "load_image",
    "load_mesh",
    "load_model",
    "look_at",
    "make_model",
    "mse",
    "psnr",
    "retrain_local",
    "save_cameras",
    "split_tet",
    "toy_dataset",
    "train",
]
