from . import compare, evaluate, featurize, predict, synth, train

# registration order is the order shown by --help
COMMANDS = (synth, featurize, train, predict, evaluate, compare)
