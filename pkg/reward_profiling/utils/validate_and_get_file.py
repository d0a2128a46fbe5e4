import os


def validate_and_get_file(path, max_file_size=1048576):
    """
    Validates that a config or results file exists, is a regular file and is not oversized.

    Args:
        path: Path of the file to check.
        max_file_size: Maximum allowed file size in bytes.

    Returns:
        A tuple containing (path, error_message). If the file is valid, error_message will be None.

    """
    if not path:
        return None, 'No file given'

    if not os.path.exists(path):
        return None, f'File not found: {path}'
    if not os.path.isfile(path):
        return None, f'Not a regular file: {path}'

    if os.path.getsize(path) > max_file_size:
        return None, f'File too large: {path}. Maximum allowed size is {max_file_size} bytes.'

    return path, None
