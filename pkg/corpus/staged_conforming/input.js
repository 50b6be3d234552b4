function profileUrl(userId) {
  return "https://api.example.com/v1/users/" + userId + "/profile";
}

function loadProfile(userId) {
  $.getJSON(profileUrl(userId), function(data) {
    render(data);
  });
}
