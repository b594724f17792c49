"""Zero-shot action recognition workbench.

Videos arrive as precomputed 2480-wide feature vectors, action classes as
human-written text features; a trainable matching network scores how well
a text describes a video. On top of that sit standalone classification,
correction of another classifier's scores, and a no-retraining feedback
loop where editing a class's text features immediately changes the
predictions.
"""

__version__ = "0.1.0"
