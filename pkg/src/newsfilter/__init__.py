"""Content-agnostic fake-news-site detection toolkit.

Feature pipeline over crawled-website telemetry, from-scratch classifier
suite, versioned domain filterlist with checkpoint deltas, and the HTTP
service that distributes the list and collects label reports.
"""

__version__ = "0.1.0"
