"""corpusforge: parallel corpus construction, MT evaluation metrics and
MQM/SQM human-evaluation tooling for low-resource language pairs."""

__version__ = "0.1.0"
