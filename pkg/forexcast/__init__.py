"""Next-close forex forecasting: indicators, a hybrid LSTM/Conv1D/attention regressor and its tooling."""

__version__ = "0.3.0"
