"""CommentWatcher: web-forum fetching, topic extraction and reply-network
analysis behind one canonical schema."""

__version__ = "0.1.0"
