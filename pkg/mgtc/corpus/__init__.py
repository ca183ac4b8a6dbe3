"""
Multi-grained labeled process texts: data model, file formats, vocabulary, \
        splits and statistics.
"""
