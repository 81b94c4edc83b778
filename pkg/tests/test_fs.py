import json
import os
import tempfile
import unittest

from tangent_llg import fs


class FsTests(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.TemporaryDirectory()
        self.root = self.tempdir.name

    def tearDown(self):
        self.tempdir.cleanup()

    def test_missing_file_reads_as_none(self):
        self.assertIsNone(fs.read_text(os.path.join(self.root, "absent.txt")))

    def test_unreadable_path_is_marked_corrupt(self):
        result = fs.read_text(self.root)
        self.assertTrue(result["_corrupt"])
        self.assertIn("_error", result)

    def test_atomic_write_creates_directories(self):
        path = os.path.join(self.root, "a", "b", "summary.json")
        fs.atomic_write_json(path, {"steps": 3, "ok": True})
        self.assertEqual(json.loads(fs.read_text(path)), {"ok": True, "steps": 3})
        self.assertEqual([name for name in os.listdir(os.path.dirname(path))], ["summary.json"])

    def test_append_line(self):
        path = fs.run_file(self.root, "events.log")
        fs.append_line(path, "first\n")
        fs.append_line(path, "second\n")
        self.assertEqual(fs.read_text(path), "first\nsecond\n")


if __name__ == "__main__":
    unittest.main()
