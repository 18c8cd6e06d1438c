from .grid import (CLASSICAL, DEFAULT_GRIDS, HyperGrid, TrainedModel, TrainingCurve,
                   fit_predict_classical, fit_predict_cnn, make_model)

__all__ = ["CLASSICAL", "DEFAULT_GRIDS", "HyperGrid", "TrainedModel", "TrainingCurve",
           "fit_predict_classical", "fit_predict_cnn", "make_model"]
