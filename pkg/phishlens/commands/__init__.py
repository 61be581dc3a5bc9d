from .classify import ClassifyCommand
from .evaluate import EvaluateCommand
from .serve import ServeCommand
